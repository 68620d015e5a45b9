#include "promptstrata/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "bundled_data.hpp"
#include "csv.hpp"
#include "io.hpp"
#include "promptstrata/error.hpp"

namespace promptstrata {

namespace {

[[noreturn]] void schema_error(const std::string& source, std::size_t row, std::string_view column,
                               const std::string& what) {
  const std::string where = source + ":" + std::to_string(row) + ":" + std::string(column);
  throw Error(ErrorKind::SchemaViolation, "schema violation at " + where + ": " + what, where);
}

void expect_width(const csv::Row& row, std::size_t width, const std::string& source,
                  std::size_t index) {
  if (row.size() != width) {
    schema_error(source, index, "*",
                 "expected " + std::to_string(width) + " fields, got " + std::to_string(row.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TopicCatalog

TopicCatalog::TopicCatalog(std::map<std::string, TopicEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> labels;
  for (const auto& [id, entry] : entries_) {
    if (id.empty()) throw Error(ErrorKind::SchemaViolation, "empty topic id");
    if (entry.label.empty()) {
      throw Error(ErrorKind::SchemaViolation, "topic " + id + " has an empty label", id);
    }
    if (!labels.insert(entry.label).second) {
      throw Error(ErrorKind::SchemaViolation, "duplicate topic label: " + entry.label, id);
    }
  }
}

const TopicEntry& TopicCatalog::at(const std::string& topic_id) const {
  auto it = entries_.find(topic_id);
  if (it == entries_.end()) {
    throw Error(ErrorKind::UnknownTopic, "unknown topic: " + topic_id, topic_id);
  }
  return it->second;
}

TopicCatalog TopicCatalog::filtered() const {
  std::map<std::string, TopicEntry> kept;
  for (const auto& [id, entry] : entries_)
    if (!entry.subjective) kept.emplace(id, entry);
  return TopicCatalog(std::move(kept));
}

// ---------------------------------------------------------------------------
// CountryTable

CountryTable::CountryTable(std::vector<CountryProfile> profiles) {
  for (auto& p : profiles) {
    if (p.country_code.empty()) throw Error(ErrorKind::SchemaViolation, "empty country code");
    if (p.major_language && p.major_language->empty()) p.major_language.reset();
    const std::string code = p.country_code;
    if (!profiles_.emplace(code, std::move(p)).second) {
      throw Error(ErrorKind::SchemaViolation, "duplicate country code: " + code, code);
    }
  }
}

const CountryTable& CountryTable::bundled() {
  static const CountryTable table =
      parse_countries(std::string(bundled::countries_csv()), "<bundled countries.csv>");
  return table;
}

const CountryProfile* CountryTable::find(const std::string& code) const {
  auto it = profiles_.find(code);
  return it == profiles_.end() ? nullptr : &it->second;
}

const CountryProfile& CountryTable::at(const std::string& code) const {
  if (const auto* p = find(code)) return *p;
  throw Error(ErrorKind::UnknownCountry, "unknown country: " + code, code);
}

const std::string* TranslationManifest::find(const std::string& topic_id,
                                             const std::string& language) const {
  auto it = entries.find({topic_id, language});
  return it == entries.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Loaders

TopicCatalog load_topics(const std::filesystem::path& path) {
  const std::string source = path.string();
  const auto rows = csv::parse(io::read_file(path), source);
  if (rows.empty()) throw Error(ErrorKind::SchemaViolation, source + ": missing header", source);
  csv::expect_header(rows[0], {"topic_id", "label", "subjective"}, source);

  std::map<std::string, TopicEntry> entries;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    expect_width(r, 3, source, i);
    if (r[0].empty()) schema_error(source, i, "topic_id", "empty");
    if (r[1].empty()) schema_error(source, i, "label", "empty");
    if (r[2] != "0" && r[2] != "1") schema_error(source, i, "subjective", "expected 0 or 1");
    if (!entries.emplace(r[0], TopicEntry{r[1], r[2] == "1"}).second) {
      schema_error(source, i, "topic_id", "duplicate topic " + r[0]);
    }
  }
  return TopicCatalog(std::move(entries));
}

CountryTable parse_countries(const std::string& csv_text, const std::string& source) {
  const auto rows = csv::parse(csv_text, source);
  if (rows.empty()) throw Error(ErrorKind::SchemaViolation, source + ": missing header", source);
  csv::expect_header(rows[0],
                     {"country_code", "display_name", "continent", "wb_class", "major_language"},
                     source);
  std::vector<CountryProfile> profiles;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    expect_width(r, 5, source, i);
    CountryProfile p;
    p.country_code = r[0];
    if (p.country_code.size() != 2 ||
        !std::all_of(p.country_code.begin(), p.country_code.end(),
                     [](char c) { return c >= 'A' && c <= 'Z'; })) {
      schema_error(source, i, "country_code", "expected ISO-3166 alpha-2, got '" + r[0] + "'");
    }
    if (!seen.insert(p.country_code).second) {
      schema_error(source, i, "country_code", "duplicate " + p.country_code);
    }
    p.display_name = r[1];
    if (p.display_name.empty()) schema_error(source, i, "display_name", "empty");
    auto continent = parse_continent(r[2]);
    if (!continent) schema_error(source, i, "continent", "unknown continent '" + r[2] + "'");
    p.continent = *continent;
    auto wb = parse_income_class(r[3]);
    if (!wb) schema_error(source, i, "wb_class", "unknown class '" + r[3] + "'");
    p.wb_class = *wb;
    if (!r[4].empty()) p.major_language = r[4];
    profiles.push_back(std::move(p));
  }
  return CountryTable(std::move(profiles));
}

CountryTable load_countries(const std::filesystem::path& path) {
  return parse_countries(io::read_file(path), path.string());
}

void validate_record(const ImageRecord& record, const TopicCatalog& topics,
                     const CountryTable& countries, std::size_t row,
                     const std::string& source) {
  const std::string where = source + " row " + std::to_string(row);
  if (record.image_id.empty()) schema_error(source, row, "image_id", "empty");
  if (!std::isfinite(record.monthly_income_usd) || !(record.monthly_income_usd > 0.0)) {
    schema_error(source, row, "monthly_income_usd", "must be a positive finite number");
  }
  if (!countries.find(record.country_code)) {
    throw Error(ErrorKind::UnknownCountry,
                "unknown country '" + record.country_code + "' at " + where, record.country_code);
  }
  if (!topics.contains(record.topic_id)) {
    throw Error(ErrorKind::UnknownTopic, "unknown topic '" + record.topic_id + "' at " + where,
                record.topic_id);
  }
}

std::vector<ImageRecord> load_images(const std::filesystem::path& path, const TopicCatalog& topics,
                                     const CountryTable& countries) {
  const std::string source = path.string();
  const auto rows = csv::parse(io::read_file(path), source);
  if (rows.empty()) throw Error(ErrorKind::SchemaViolation, source + ": missing header", source);
  csv::expect_header(rows[0], {"image_id", "country_code", "monthly_income_usd", "topic_id"},
                     source);

  std::vector<ImageRecord> images;
  images.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    expect_width(r, 4, source, i);
    ImageRecord rec;
    rec.image_id = r[0];
    rec.country_code = r[1];
    if (!io::parse_double(r[2], rec.monthly_income_usd)) {
      schema_error(source, i, "monthly_income_usd", "not a number: '" + r[2] + "'");
    }
    rec.topic_id = r[3];
    validate_record(rec, topics, countries, i, source);
    images.push_back(std::move(rec));
  }

  std::sort(images.begin(), images.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
  auto dup = std::adjacent_find(images.begin(), images.end(),
                                [](const ImageRecord& a, const ImageRecord& b) {
                                  return a.image_id == b.image_id;
                                });
  if (dup != images.end()) {
    throw Error(ErrorKind::DuplicateImageId, "duplicate image id: " + dup->image_id, dup->image_id);
  }
  return images;
}

Metadata load_metadata(const MetadataPaths& paths) {
  Metadata meta;
  meta.topics = load_topics(paths.topics);
  meta.countries = paths.countries ? load_countries(*paths.countries) : CountryTable::bundled();
  meta.images = load_images(paths.images, meta.topics, meta.countries);
  return meta;
}

TranslationManifest parse_translations(const std::string& json_text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, source + ": invalid JSON: " + e.what(), source);
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::SchemaViolation, source + ": expected a JSON object", source);
  }
  TranslationManifest manifest;
  for (const auto& [key, value] : doc.items()) {
    if (key == "@source_model") {
      if (!value.is_string()) throw Error(ErrorKind::SchemaViolation, source + ": @source_model must be a string", source);
      manifest.source_model_tag = value.get<std::string>();
      continue;
    }
    if (key == "@chrf") {
      if (!value.is_object()) throw Error(ErrorKind::SchemaViolation, source + ": @chrf must be an object", source);
      for (const auto& [lang, score] : value.items()) {
        if (!score.is_number()) {
          throw Error(ErrorKind::SchemaViolation, source + ": @chrf." + lang + " must be a number", source);
        }
        manifest.chrf_scores[lang] = score.get<double>();
      }
      continue;
    }
    if (!key.empty() && key[0] == '@') continue;
    const auto bar = key.find('|');
    if (bar == std::string::npos || bar == 0 || bar + 1 == key.size() ||
        key.find('|', bar + 1) != std::string::npos) {
      throw Error(ErrorKind::SchemaViolation,
                  source + ": key '" + key + "' is not of the form <topic_id>|<language_code>", key);
    }
    if (!value.is_string() || value.get<std::string>().empty()) {
      throw Error(ErrorKind::SchemaViolation, source + ": translation for '" + key + "' must be a non-empty string", key);
    }
    manifest.entries[{key.substr(0, bar), key.substr(bar + 1)}] = value.get<std::string>();
  }
  return manifest;
}

TranslationManifest load_translations(const std::filesystem::path& path) {
  return parse_translations(io::read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Writers

void write_images(const std::filesystem::path& path, const std::vector<ImageRecord>& images) {
  std::string out = "image_id,country_code,monthly_income_usd,topic_id\n";
  for (const auto& r : images) {
    out += csv::escape(r.image_id) + ',' + csv::escape(r.country_code) + ',' +
           io::format_double(r.monthly_income_usd) + ',' + csv::escape(r.topic_id) + '\n';
  }
  io::write_file(path, out);
}

void write_topics(const std::filesystem::path& path, const TopicCatalog& topics) {
  std::string out = "topic_id,label,subjective\n";
  for (const auto& [id, e] : topics.entries()) {
    out += csv::escape(id) + ',' + csv::escape(e.label) + ',' + (e.subjective ? "1" : "0") + '\n';
  }
  io::write_file(path, out);
}

void write_countries(const std::filesystem::path& path, const CountryTable& countries) {
  std::string out = "country_code,display_name,continent,wb_class,major_language\n";
  for (const auto& [code, p] : countries.profiles()) {
    out += csv::escape(code) + ',' + csv::escape(p.display_name) + ',' +
           std::string(to_string(p.continent)) + ',' + std::string(to_string(p.wb_class)) + ',' +
           csv::escape(p.major_language.value_or("")) + '\n';
  }
  io::write_file(path, out);
}

void write_translations(const std::filesystem::path& path, const TranslationManifest& manifest) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [key, text] : manifest.entries) doc[key.first + "|" + key.second] = text;
  if (!manifest.source_model_tag.empty()) doc["@source_model"] = manifest.source_model_tag;
  if (!manifest.chrf_scores.empty()) doc["@chrf"] = manifest.chrf_scores;
  io::write_file(path, doc.dump(2) + "\n");
}

}  // namespace promptstrata
