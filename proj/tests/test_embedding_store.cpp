#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "promptstrata/embedding_store.hpp"
#include "promptstrata/error.hpp"
#include "support.hpp"

using namespace promptstrata;
using testing_support::TempDir;
using testing_support::read_text;
using testing_support::write_text;

namespace {

void write_payload(const std::filesystem::path& bin, const std::vector<float>& values) {
  std::string bytes(values.size() * sizeof(float), '\0');
  std::memcpy(bytes.data(), values.data(), bytes.size());
  write_text(bin, bytes);
}

void write_header(const std::filesystem::path& bin, std::size_t dim, std::vector<std::string> ids,
                  bool normalized) {
  nlohmann::json h{{"dim", dim}, {"rows", ids.size()}, {"ids", ids}, {"normalized", normalized},
                   {"space_tag", "test"}};
  write_text(sidecar_path(bin), h.dump());
}

ErrorKind load_kind(const std::filesystem::path& bin) {
  try {
    EmbeddingStore::load(bin);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::BadArgument;
}

}  // namespace

TEST(EmbeddingStore, ExactPayloadLoads) {
  TempDir dir("emb_exact");
  const auto bin = dir / "m.bin";
  write_header(bin, 4, {"a", "b"}, true);
  write_payload(bin, {1, 0, 0, 0, 0, 1, 0, 0});
  ASSERT_EQ(std::filesystem::file_size(bin), 32u);
  const auto s = EmbeddingStore::load(bin);
  EXPECT_EQ(s.dim(), 4u);
  EXPECT_EQ(s.rows(), 2u);
  EXPECT_EQ(s.find("b"), 1u);
  EXPECT_FLOAT_EQ(s.row(1)[1], 1.0f);
}

TEST(EmbeddingStore, ShortPayloadIsTruncated) {
  TempDir dir("emb_short");
  const auto bin = dir / "m.bin";
  write_header(bin, 4, {"a", "b"}, true);
  write_payload(bin, {1, 0, 0, 0, 0, 1, 0});
  ASSERT_EQ(std::filesystem::file_size(bin), 28u);
  EXPECT_EQ(load_kind(bin), ErrorKind::TruncatedMatrix);
}

TEST(EmbeddingStore, LongPayloadIsDimensionMismatch) {
  TempDir dir("emb_long");
  const auto bin = dir / "m.bin";
  write_header(bin, 4, {"a", "b"}, true);
  write_payload(bin, {1, 0, 0, 0, 0, 1, 0, 0, 0});
  EXPECT_EQ(load_kind(bin), ErrorKind::DimensionMismatch);
}

TEST(EmbeddingStore, RawRowIsNormalizedOnLoad) {
  TempDir dir("emb_raw");
  const auto bin = dir / "m.bin";
  write_header(bin, 2, {"a"}, false);
  write_payload(bin, {3, 4});
  const auto s = EmbeddingStore::load(bin);
  EXPECT_FLOAT_EQ(s.row(0)[0], 0.6f);
  EXPECT_FLOAT_EQ(s.row(0)[1], 0.8f);
}

TEST(EmbeddingStore, RejectsBadContent) {
  TempDir dir("emb_bad");
  const auto bin = dir / "m.bin";
  write_header(bin, 2, {"a"}, false);
  write_payload(bin, {std::numeric_limits<float>::quiet_NaN(), 1});
  EXPECT_EQ(load_kind(bin), ErrorKind::NonFiniteValue);

  write_header(bin, 2, {"a"}, false);
  write_payload(bin, {0, 0});
  EXPECT_EQ(load_kind(bin), ErrorKind::NotNormalized);

  write_header(bin, 2, {"a", "a"}, true);
  write_payload(bin, {1, 0, 0, 1});
  EXPECT_EQ(load_kind(bin), ErrorKind::DuplicateImageId);

  write_header(bin, 2, {"a"}, true);
  std::filesystem::remove(bin);
  EXPECT_EQ(load_kind(bin), ErrorKind::MissingFile);
}

TEST(EmbeddingStore, NormalizedInputFarFromUnitIsRejected) {
  TempDir dir("emb_notnorm");
  const auto bin = dir / "m.bin";
  write_header(bin, 2, {"a"}, true);
  write_payload(bin, {3, 4});
  EXPECT_EQ(load_kind(bin), ErrorKind::NotNormalized);
}

TEST(EmbeddingStore, WriteOfLoadIsByteIdentical) {
  TempDir dir("emb_roundtrip");
  std::vector<float> values;
  std::vector<std::string> ids;
  for (int r = 0; r < 17; ++r) {
    ids.push_back("row" + std::to_string(r));
    for (int c = 0; c < 5; ++c) values.push_back(static_cast<float>(std::sin(r * 7 + c * 3 + 1)));
  }
  EmbeddingStore::write_raw(dir / "raw.bin", 5, ids, values, "space");
  const auto s = EmbeddingStore::load(dir / "raw.bin");
  s.write(dir / "a.bin");
  const auto again = EmbeddingStore::load(dir / "a.bin");
  again.write(dir / "b.bin");
  EXPECT_EQ(read_text(dir / "a.bin"), read_text(dir / "b.bin"));
  EXPECT_EQ(read_text(dir / "a.json"), read_text(dir / "b.json"));
  EXPECT_EQ(again.values(), s.values());
  for (std::size_t r = 0; r < s.rows(); ++r) EXPECT_NEAR(l2_norm(s.row(r)), 1.0, 1e-6);
}

TEST(EmbeddingStore, SidecarPath) {
  EXPECT_EQ(sidecar_path("/x/y/prompts.bin"), std::filesystem::path("/x/y/prompts.json"));
}
