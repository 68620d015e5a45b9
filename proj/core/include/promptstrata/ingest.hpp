#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "promptstrata/domain.hpp"

namespace promptstrata {

inline constexpr std::size_t kUnboundRow = std::numeric_limits<std::size_t>::max();

struct ImageRecord {
  std::string image_id;
  std::string country_code;     // ISO-3166 alpha-2
  double monthly_income_usd{};  // PPP-adjusted, stored as read
  std::string topic_id;
  std::size_t embedding_row = kUnboundRow;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct TopicEntry {
  std::string label;
  bool subjective = false;

  friend bool operator==(const TopicEntry&, const TopicEntry&) = default;
};

class TopicCatalog {
 public:
  TopicCatalog() = default;
  /// Throws SchemaViolation on duplicate ids or labels.
  explicit TopicCatalog(std::map<std::string, TopicEntry> entries);

  const std::map<std::string, TopicEntry>& entries() const { return entries_; }
  bool contains(const std::string& topic_id) const { return entries_.count(topic_id) != 0; }
  const TopicEntry& at(const std::string& topic_id) const;
  std::size_t size() const { return entries_.size(); }

  /// Catalog with subjective topics removed.
  TopicCatalog filtered() const;

 private:
  std::map<std::string, TopicEntry> entries_;
};

struct CountryProfile {
  std::string country_code;
  std::string display_name;
  Continent continent{};
  IncomeClass wb_class{};
  std::optional<std::string> major_language;

  friend bool operator==(const CountryProfile&, const CountryProfile&) = default;
};

class CountryTable {
 public:
  CountryTable() = default;
  explicit CountryTable(std::vector<CountryProfile> profiles);

  /// The reference table shipped with the library.
  static const CountryTable& bundled();

  const CountryProfile* find(const std::string& code) const;
  /// Throws UnknownCountry.
  const CountryProfile& at(const std::string& code) const;
  const std::map<std::string, CountryProfile>& profiles() const { return profiles_; }
  std::size_t size() const { return profiles_.size(); }

 private:
  std::map<std::string, CountryProfile> profiles_;
};

struct TranslationManifest {
  std::map<std::pair<std::string, std::string>, std::string> entries;  // (topic, lang) -> text
  std::string source_model_tag;
  std::map<std::string, double> chrf_scores;

  const std::string* find(const std::string& topic_id, const std::string& language) const;
};

struct Metadata {
  std::vector<ImageRecord> images;  // sorted by image_id
  TopicCatalog topics;
  CountryTable countries;
};

struct MetadataPaths {
  std::filesystem::path images;
  std::filesystem::path topics;
  std::optional<std::filesystem::path> countries;  // bundled table when absent
};

TopicCatalog load_topics(const std::filesystem::path& path);
CountryTable load_countries(const std::filesystem::path& path);
CountryTable parse_countries(const std::string& csv_text, const std::string& source);

/// Images are returned sorted by image_id, so row order in the file does not
/// matter. Every record is validated against the catalog and country table.
std::vector<ImageRecord> load_images(const std::filesystem::path& path, const TopicCatalog& topics,
                                     const CountryTable& countries);

Metadata load_metadata(const MetadataPaths& paths);

TranslationManifest load_translations(const std::filesystem::path& path);
TranslationManifest parse_translations(const std::string& json_text, const std::string& source);

void write_images(const std::filesystem::path& path, const std::vector<ImageRecord>& images);
void write_topics(const std::filesystem::path& path, const TopicCatalog& topics);
void write_countries(const std::filesystem::path& path, const CountryTable& countries);
void write_translations(const std::filesystem::path& path, const TranslationManifest& manifest);

/// Validators shared by the loaders; each throws SchemaViolation / UnknownCountry
/// / UnknownTopic naming the offending row.
void validate_record(const ImageRecord& record, const TopicCatalog& topics,
                     const CountryTable& countries, std::size_t row,
                     const std::string& source = "images");

}  // namespace promptstrata
