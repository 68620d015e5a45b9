#include "promptstrata/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include <nlohmann/json.hpp>

#include "io.hpp"
#include "promptstrata/error.hpp"

namespace promptstrata {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kRepairTolerance = 1e-2;

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

std::vector<float> decode_le(const std::string& bytes) {
  std::vector<float> out(bytes.size() / 4);
  std::memcpy(out.data(), bytes.data(), out.size() * 4);
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : out) f = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(f)));
  }
  return out;
}

std::string encode_le(const std::vector<float>& values) {
  std::string out(values.size() * 4, '\0');
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::uint32_t w = byteswap32(std::bit_cast<std::uint32_t>(values[i]));
      std::memcpy(out.data() + 4 * i, &w, 4);
    }
  } else {
    std::memcpy(out.data(), values.data(), out.size());
  }
  return out;
}

void check_shape(std::size_t dim, const std::vector<std::string>& ids, const std::vector<float>& values,
                 const std::string& source) {
  if (dim == 0) throw Error(ErrorKind::DimensionMismatch, source + ": dim must be positive", source);
  if (values.size() != ids.size() * dim) {
    throw Error(ErrorKind::DimensionMismatch,
                source + ": " + std::to_string(values.size()) + " values do not fill " +
                    std::to_string(ids.size()) + " x " + std::to_string(dim),
                source);
  }
  for (std::size_t r = 0; r < ids.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      if (!std::isfinite(values[r * dim + c])) {
        throw Error(ErrorKind::NonFiniteValue,
                    source + ": non-finite value in row " + std::to_string(r) + " (" + ids[r] + ")",
                    ids[r]);
      }
    }
  }
}

void write_sidecar(const std::filesystem::path& bin_path, std::size_t dim,
                   const std::vector<std::string>& ids, bool normalized, const std::string& tag) {
  nlohmann::json header;
  header["dim"] = dim;
  header["rows"] = ids.size();
  header["ids"] = ids;
  header["normalized"] = normalized;
  header["space_tag"] = tag;
  io::write_file(sidecar_path(bin_path), header.dump(2) + "\n");
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& bin_path) {
  auto p = bin_path;
  p.replace_extension(".json");
  return p;
}

double l2_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

EmbeddingStore::EmbeddingStore(std::size_t dim, std::vector<std::string> ids,
                               std::vector<float> values, bool normalized, std::string space_tag)
    : dim_(dim), ids_(std::move(ids)), values_(std::move(values)), space_tag_(std::move(space_tag)) {
  check_shape(dim_, ids_, values_, "embedding store");
  index_.reserve(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (!index_.emplace(ids_[r], r).second) {
      throw Error(ErrorKind::DuplicateImageId, "duplicate embedding id: " + ids_[r], ids_[r]);
    }
  }
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    float* row = values_.data() + r * dim_;
    const double norm = l2_norm({row, dim_});
    if (normalized) {
      const double drift = std::abs(norm - 1.0);
      if (drift <= kUnitTolerance) continue;
      if (drift > kRepairTolerance) {
        throw Error(ErrorKind::NotNormalized,
                    "row " + ids_[r] + " is flagged normalized but has norm " + io::format_double(norm),
                    ids_[r]);
      }
      ++renormalized_rows_;
    }
    if (norm == 0.0) {
      throw Error(ErrorKind::NotNormalized, "row " + ids_[r] + " is the zero vector", ids_[r]);
    }
    for (std::size_t c = 0; c < dim_; ++c) {
      row[c] = static_cast<float>(static_cast<double>(row[c]) / norm);
    }
  }
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& bin_path) {
  const auto header_path = sidecar_path(bin_path);
  const std::string source = header_path.string();
  // Both files must exist before anything is parsed so the error names the missing one.
  std::string header_text = io::read_file(header_path);
  std::string payload = io::read_file(bin_path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, source + ": invalid JSON: " + e.what(), source);
  }
  auto require = [&](const char* key, auto check, const char* expect) -> const nlohmann::json& {
    if (!header.is_object() || !header.contains(key) || !check(header[key])) {
      throw Error(ErrorKind::SchemaViolation,
                  source + ": field `" + key + "` missing or not " + expect, source);
    }
    return header[key];
  };
  const auto dim = require("dim", [](const auto& j) { return j.is_number_unsigned() && j.template get<std::size_t>() > 0; },
                           "a positive integer").get<std::size_t>();
  const auto rows = require("rows", [](const auto& j) { return j.is_number_unsigned(); },
                            "a non-negative integer").get<std::size_t>();
  const auto& ids_json = require("ids", [](const auto& j) { return j.is_array(); }, "an array");
  const bool normalized = require("normalized", [](const auto& j) { return j.is_boolean(); },
                                  "a boolean").get<bool>();
  const auto tag = require("space_tag", [](const auto& j) { return j.is_string(); }, "a string")
                       .get<std::string>();

  std::vector<std::string> ids;
  ids.reserve(ids_json.size());
  for (const auto& id : ids_json) {
    if (!id.is_string()) throw Error(ErrorKind::SchemaViolation, source + ": ids must be strings", source);
    ids.push_back(id.get<std::string>());
  }
  if (ids.size() != rows) {
    throw Error(ErrorKind::DimensionMismatch,
                source + ": header lists " + std::to_string(ids.size()) + " ids for " +
                    std::to_string(rows) + " rows",
                source);
  }
  const std::size_t expected = rows * dim * 4;
  if (payload.size() < expected) {
    throw Error(ErrorKind::TruncatedMatrix,
                bin_path.string() + ": payload has " + std::to_string(payload.size()) +
                    " bytes, header needs " + std::to_string(expected),
                bin_path.string());
  }
  if (payload.size() > expected) {
    throw Error(ErrorKind::DimensionMismatch,
                bin_path.string() + ": payload has " + std::to_string(payload.size()) +
                    " bytes, header needs " + std::to_string(expected),
                bin_path.string());
  }
  return EmbeddingStore(dim, std::move(ids), decode_le(payload), normalized, tag);
}

void EmbeddingStore::write(const std::filesystem::path& bin_path) const {
  io::write_file(bin_path, encode_le(values_));
  write_sidecar(bin_path, dim_, ids_, true, space_tag_);
}

void EmbeddingStore::write_raw(const std::filesystem::path& bin_path, std::size_t dim,
                               const std::vector<std::string>& ids,
                               const std::vector<float>& values, const std::string& space_tag) {
  check_shape(dim, ids, values, bin_path.string());
  io::write_file(bin_path, encode_le(values));
  write_sidecar(bin_path, dim, ids, false, space_tag);
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace promptstrata
