#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace promptstrata {

/// Row-major float32 matrix keyed by string ids.
///
/// On disk a store is two files: `<stem>.bin` holding little-endian IEEE-754
/// float32 values, and `<stem>.json` with `dim`, `rows`, `ids`, `normalized`
/// and `space_tag`. Loading always yields unit-norm rows; raw files are
/// normalized on load (norm computed in double, rounded once to float).
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Validates shape, id uniqueness and finiteness. When `normalized` is false
  /// every row is scaled to unit norm.
  EmbeddingStore(std::size_t dim, std::vector<std::string> ids, std::vector<float> values,
                 bool normalized, std::string space_tag);

  static EmbeddingStore load(const std::filesystem::path& bin_path);

  /// Writes `<stem>.bin` and `<stem>.json`. Stores are always written with
  /// normalized=true.
  void write(const std::filesystem::path& bin_path) const;

  /// Writes raw (unnormalized) values with normalized=false. Used by the
  /// fixture generator; validates shape like the constructor.
  static void write_raw(const std::filesystem::path& bin_path, std::size_t dim,
                        const std::vector<std::string>& ids, const std::vector<float>& values,
                        const std::string& space_tag);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& space_tag() const { return space_tag_; }
  bool normalized() const { return true; }
  /// Rows of a normalized=true input that drifted past 1e-6 and were rescaled.
  std::size_t renormalized_rows() const { return renormalized_rows_; }

  std::span<const float> row(std::size_t r) const {
    return {values_.data() + r * dim_, dim_};
  }
  std::optional<std::size_t> find(const std::string& id) const;

  const std::vector<float>& values() const { return values_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::string space_tag_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t renormalized_rows_ = 0;
};

/// Sidecar path for a payload path: replaces the extension with `.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& bin_path);

/// Euclidean norm accumulated in double.
double l2_norm(std::span<const float> v);

}  // namespace promptstrata
