#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "promptstrata/dataset.hpp"
#include "promptstrata/embedding_store.hpp"
#include "promptstrata/ingest.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::path(PROMPTSTRATA_TEST_TMP) / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& child) const { return path_ / child; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small hand-built dataset: every image and prompt vector is given
/// explicitly. Images are (id, country, income, topic, vector).
struct ImageSpec {
  std::string id;
  std::string country;
  double income;
  std::string topic;
  std::vector<float> vec;
};

inline promptstrata::Dataset make_dataset(
    const std::vector<ImageSpec>& images, const std::vector<std::pair<std::string, std::vector<float>>>& prompts,
    const std::map<std::string, promptstrata::TopicEntry>& topics) {
  using namespace promptstrata;
  Dataset d;
  d.meta.topics = TopicCatalog(topics);
  d.meta.countries = CountryTable::bundled();
  std::vector<std::string> ids;
  std::vector<float> values;
  const std::size_t dim = images.front().vec.size();
  for (const auto& img : images) {
    d.meta.images.push_back({img.id, img.country, img.income, img.topic, kUnboundRow});
    ids.push_back(img.id);
    values.insert(values.end(), img.vec.begin(), img.vec.end());
  }
  std::sort(d.meta.images.begin(), d.meta.images.end(),
            [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  d.image_embeddings = EmbeddingStore(dim, ids, values, false, "test");
  std::vector<std::string> pids;
  std::vector<float> pvalues;
  for (const auto& [key, vec] : prompts) {
    pids.push_back(key);
    pvalues.insert(pvalues.end(), vec.begin(), vec.end());
  }
  d.prompt_embeddings = EmbeddingStore(dim, pids, pvalues, false, "test");
  d.edges = dollar_street_edges();
  bind_image_rows(d.meta, d.image_embeddings);
  return d;
}

#ifdef PROMPTSTRATA_CLI
struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs the CLI with a shell-quoted argument string.
inline CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path err_file = fs::path(PROMPTSTRATA_TEST_TMP) / ("stderr_" + std::to_string(counter++) + ".txt");
  fs::create_directories(err_file.parent_path());
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + std::string(PROMPTSTRATA_CLI) + "\" " + args +
                          " 2>\"" + err_file.string() + "\"";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text(err_file);
  fs::remove(err_file);
  return r;
}
#endif

}  // namespace testing_support

namespace testing_support {

/// Compares `actual` with golden file `name`. With PROMPTSTRATA_UPDATE_GOLDENS=1
/// in the environment the file is rewritten instead and the check passes.
inline bool matches_golden(const std::string& name, const std::string& actual, std::string* diff = nullptr) {
  const fs::path path = fs::path(PROMPTSTRATA_GOLDEN_DIR) / name;
  if (const char* update = std::getenv("PROMPTSTRATA_UPDATE_GOLDENS"); update && std::string(update) == "1") {
    write_text(path, actual);
    return true;
  }
  if (!fs::exists(path)) {
    if (diff) *diff = "golden file missing: " + path.string();
    return false;
  }
  const std::string expected = read_text(path);
  if (expected == actual) return true;
  if (diff) *diff = "expected:\n" + expected + "\nactual:\n" + actual;
  return false;
}

}  // namespace testing_support
