#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "promptstrata/ingest.hpp"

namespace promptstrata {

class EmbeddingStore;

enum class IncomeCategory : std::uint8_t { Poor, Rich, Neutral };

std::string_view to_string(IncomeCategory c);  // "poor" / "rich" / "neutral"
std::optional<IncomeCategory> parse_income_category(std::string_view s);

struct DefaultEnglish {
  friend bool operator==(const DefaultEnglish&, const DefaultEnglish&) = default;
};
struct Translated {
  std::string language;
  friend bool operator==(const Translated&, const Translated&) = default;
};
struct CountrySuffix {
  std::string country_code;
  friend bool operator==(const CountrySuffix&, const CountrySuffix&) = default;
};
struct IncomeSuffix {
  IncomeCategory category{};
  std::size_t synonym_index = 0;
  friend bool operator==(const IncomeSuffix&, const IncomeSuffix&) = default;
};

using PromptFamily = std::variant<DefaultEnglish, Translated, CountrySuffix, IncomeSuffix>;

/// "default", "translated:<lang>", "country:<code>" or "income:<category>:<index>".
std::string family_tag(const PromptFamily& family);

/// Embedding-store row id of a prompt: "<family_tag>|<topic_id>".
std::string prompt_key(const PromptFamily& family, std::string_view topic_id);

struct PromptVariant {
  PromptFamily family;
  std::string topic_id;
  std::string text;
  std::optional<std::size_t> embedding_row;

  std::string key() const { return prompt_key(family, topic_id); }
};

/// Suffix phrases per income category. A category may be absent from a
/// custom config; a present one must be non-empty with distinct phrases.
class SynonymSet {
 public:
  SynonymSet() = default;
  explicit SynonymSet(std::map<IncomeCategory, std::vector<std::string>> phrases);

  static const SynonymSet& defaults();
  static SynonymSet load(const std::filesystem::path& path);
  static SynonymSet parse(const std::string& json_text, const std::string& source);

  bool has(IncomeCategory c) const { return phrases_.count(c) != 0; }
  /// Throws UnknownCategory.
  const std::vector<std::string>& phrases(IncomeCategory c) const;
  const std::map<IncomeCategory, std::vector<std::string>>& all() const { return phrases_; }

  std::string canonical_json() const;
  /// SHA-256 of canonical_json(); reported alongside results.
  std::string hash() const;

 private:
  std::map<IncomeCategory, std::vector<std::string>> phrases_;
};

/// "This is a photo of {label}". Throws EmptyLabel.
std::string default_prompt(std::string_view topic_label);
/// "This is a photo of {label} from {country}". Throws EmptyLabel / EmptyCountry.
std::string country_suffix_prompt(std::string_view topic_label, std::string_view country_display_name);
/// One "This is a photo of {label} from {phrase}" per synonym, in order.
std::vector<std::string> income_suffix_prompts(std::string_view topic_label, IncomeCategory category,
                                               const SynonymSet& synonyms);
/// Stored translation, verbatim. Throws MissingTranslation.
std::string translated_prompt(const std::string& topic_id, const std::string& language,
                              const TranslationManifest& manifest);

struct PromptPlanOptions {
  bool default_english = true;
  bool translated = true;
  bool country_suffix = true;
  bool income_suffix = true;
};

/// Every prompt the engine can use for the non-subjective topics that have
/// images, the languages native to countries with images, and those countries.
/// Translated variants need `manifest`; MissingTranslation if a pair is absent.
std::vector<PromptVariant> build_prompt_plan(const Metadata& meta, const SynonymSet& synonyms,
                                             const TranslationManifest* manifest,
                                             const PromptPlanOptions& options = {});

/// Binds every variant to its prompt-store row. UnresolvedPrompt lists the
/// first missing key.
void resolve_prompts(std::vector<PromptVariant>& variants, const EmbeddingStore& prompts);

/// Export for the extractor: array of {key, family, topic_id, text}.
nlohmann::json prompt_plan_to_json(const std::vector<PromptVariant>& variants);

}  // namespace promptstrata
