#include "promptstrata/prompts.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "bundled_data.hpp"
#include "io.hpp"
#include "promptstrata/embedding_store.hpp"
#include "promptstrata/error.hpp"
#include "promptstrata/hashing.hpp"

namespace promptstrata {

namespace {

constexpr std::string_view kTemplatePrefix = "This is a photo of ";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(IncomeCategory c) {
  switch (c) {
    case IncomeCategory::Poor: return "poor";
    case IncomeCategory::Rich: return "rich";
    case IncomeCategory::Neutral: return "neutral";
  }
  return "?";
}

std::optional<IncomeCategory> parse_income_category(std::string_view s) {
  if (s == "poor") return IncomeCategory::Poor;
  if (s == "rich") return IncomeCategory::Rich;
  if (s == "neutral") return IncomeCategory::Neutral;
  return std::nullopt;
}

std::string family_tag(const PromptFamily& family) {
  return std::visit(
      Overloaded{
          [](const DefaultEnglish&) { return std::string("default"); },
          [](const Translated& t) { return "translated:" + t.language; },
          [](const CountrySuffix& c) { return "country:" + c.country_code; },
          [](const IncomeSuffix& i) {
            return "income:" + std::string(to_string(i.category)) + ":" +
                   std::to_string(i.synonym_index);
          },
      },
      family);
}

std::string prompt_key(const PromptFamily& family, std::string_view topic_id) {
  return family_tag(family) + "|" + std::string(topic_id);
}

// ---------------------------------------------------------------------------
// SynonymSet

SynonymSet::SynonymSet(std::map<IncomeCategory, std::vector<std::string>> phrases)
    : phrases_(std::move(phrases)) {
  for (const auto& [cat, list] : phrases_) {
    if (list.empty()) {
      throw Error(ErrorKind::SchemaViolation,
                  "synonym category '" + std::string(to_string(cat)) + "' is empty");
    }
    std::set<std::string> seen;
    for (const auto& p : list) {
      if (p.empty()) throw Error(ErrorKind::SchemaViolation, "empty synonym phrase");
      if (!seen.insert(p).second) {
        throw Error(ErrorKind::SchemaViolation, "duplicate synonym phrase: " + p, p);
      }
    }
  }
}

const SynonymSet& SynonymSet::defaults() {
  static const SynonymSet set = parse(std::string(bundled::synonyms_json()), "<bundled synonyms>");
  return set;
}

SynonymSet SynonymSet::parse(const std::string& json_text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, source + ": invalid JSON: " + e.what(), source);
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::SchemaViolation, source + ": expected a JSON object", source);
  }
  std::map<IncomeCategory, std::vector<std::string>> phrases;
  for (const auto& [key, value] : doc.items()) {
    auto cat = parse_income_category(key);
    if (!cat) {
      throw Error(ErrorKind::UnknownCategory, source + ": unknown synonym category '" + key + "'", key);
    }
    if (!value.is_array()) {
      throw Error(ErrorKind::SchemaViolation, source + ": '" + key + "' must be an array", source);
    }
    auto& list = phrases[*cat];
    for (const auto& p : value) {
      if (!p.is_string()) {
        throw Error(ErrorKind::SchemaViolation, source + ": phrases must be strings", source);
      }
      list.push_back(p.get<std::string>());
    }
  }
  return SynonymSet(std::move(phrases));
}

SynonymSet SynonymSet::load(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

const std::vector<std::string>& SynonymSet::phrases(IncomeCategory c) const {
  auto it = phrases_.find(c);
  if (it == phrases_.end()) {
    throw Error(ErrorKind::UnknownCategory,
                "no synonyms defined for category '" + std::string(to_string(c)) + "'",
                std::string(to_string(c)));
  }
  return it->second;
}

std::string SynonymSet::canonical_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [cat, list] : phrases_) doc[std::string(to_string(cat))] = list;
  return doc.dump();
}

std::string SynonymSet::hash() const { return sha256_hex(canonical_json()); }

// ---------------------------------------------------------------------------
// Templates

std::string default_prompt(std::string_view topic_label) {
  if (topic_label.empty()) throw Error(ErrorKind::EmptyLabel, "topic label is empty");
  std::string out(kTemplatePrefix);
  out += topic_label;
  return out;
}

std::string country_suffix_prompt(std::string_view topic_label,
                                  std::string_view country_display_name) {
  std::string out = default_prompt(topic_label);
  if (country_display_name.empty()) throw Error(ErrorKind::EmptyCountry, "country name is empty");
  out += " from ";
  out += country_display_name;
  return out;
}

std::vector<std::string> income_suffix_prompts(std::string_view topic_label,
                                               IncomeCategory category,
                                               const SynonymSet& synonyms) {
  const std::string base = default_prompt(topic_label);
  std::vector<std::string> out;
  for (const auto& phrase : synonyms.phrases(category)) out.push_back(base + " from " + phrase);
  return out;
}

std::string translated_prompt(const std::string& topic_id, const std::string& language,
                              const TranslationManifest& manifest) {
  if (const auto* text = manifest.find(topic_id, language)) return *text;
  throw Error(ErrorKind::MissingTranslation,
              "no translation for topic '" + topic_id + "' into '" + language + "'",
              topic_id + "|" + language);
}

// ---------------------------------------------------------------------------
// Plans

std::vector<PromptVariant> build_prompt_plan(const Metadata& meta, const SynonymSet& synonyms,
                                             const TranslationManifest* manifest,
                                             const PromptPlanOptions& options) {
  std::set<std::string> topics;
  std::set<std::string> countries;
  for (const auto& img : meta.images) {
    if (meta.topics.at(img.topic_id).subjective) continue;
    topics.insert(img.topic_id);
    countries.insert(img.country_code);
  }
  std::set<std::string> languages;
  for (const auto& code : countries) {
    if (const auto& lang = meta.countries.at(code).major_language) languages.insert(*lang);
  }
  if (options.translated && !languages.empty() && manifest == nullptr) {
    throw Error(ErrorKind::MissingTranslation,
                "translated prompts requested but no translation manifest was provided");
  }

  std::vector<PromptVariant> plan;
  for (const auto& topic : topics) {
    const auto& label = meta.topics.at(topic).label;
    if (options.default_english) {
      plan.push_back({DefaultEnglish{}, topic, default_prompt(label), std::nullopt});
    }
    if (options.translated) {
      for (const auto& lang : languages) {
        plan.push_back({Translated{lang}, topic, translated_prompt(topic, lang, *manifest), std::nullopt});
      }
    }
    if (options.country_suffix) {
      for (const auto& code : countries) {
        plan.push_back({CountrySuffix{code}, topic,
                        country_suffix_prompt(label, meta.countries.at(code).display_name),
                        std::nullopt});
      }
    }
    if (options.income_suffix) {
      for (const auto& [cat, phrases] : synonyms.all()) {
        auto texts = income_suffix_prompts(label, cat, synonyms);
        for (std::size_t i = 0; i < texts.size(); ++i) {
          plan.push_back({IncomeSuffix{cat, i}, topic, std::move(texts[i]), std::nullopt});
        }
      }
    }
  }
  return plan;
}

void resolve_prompts(std::vector<PromptVariant>& variants, const EmbeddingStore& prompts) {
  for (auto& v : variants) {
    const auto key = v.key();
    auto row = prompts.find(key);
    if (!row) {
      throw Error(ErrorKind::UnresolvedPrompt, "prompt '" + key + "' has no embedding row", key);
    }
    v.embedding_row = *row;
  }
}

nlohmann::json prompt_plan_to_json(const std::vector<PromptVariant>& variants) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : variants) {
    out.push_back({{"key", v.key()},
                   {"family", family_tag(v.family)},
                   {"topic_id", v.topic_id},
                   {"text", v.text}});
  }
  return out;
}

}  // namespace promptstrata
