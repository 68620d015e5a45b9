#include <gtest/gtest.h>

#include <set>

#include "promptstrata/embedding_store.hpp"
#include "promptstrata/error.hpp"
#include "promptstrata/prompts.hpp"
#include "support.hpp"

using namespace promptstrata;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::BadArgument;
}

Metadata small_meta() {
  Metadata m;
  m.topics = TopicCatalog({{"t1", {"cutlery", false}}, {"t2", {"stoves", false}}, {"t3", {"mood", true}}});
  m.countries = CountryTable::bundled();
  m.images = {{"a", "CM", 50, "t1"}, {"b", "PE", 900, "t2"}, {"c", "LR", 20, "t1"}, {"d", "FR", 4000, "t3"}};
  return m;
}

}  // namespace

TEST(Prompts, DefaultTemplate) {
  EXPECT_EQ(default_prompt("cutlery"), "This is a photo of cutlery");
  EXPECT_EQ(default_prompt("toilet paper"), "This is a photo of toilet paper");
  EXPECT_EQ(kind_of([] { default_prompt(""); }), ErrorKind::EmptyLabel);
}

TEST(Prompts, CountrySuffix) {
  EXPECT_EQ(country_suffix_prompt("cutlery", "Cameroon"), "This is a photo of cutlery from Cameroon");
  EXPECT_EQ(country_suffix_prompt("stoves", "Peru"), "This is a photo of stoves from Peru");
  EXPECT_EQ(kind_of([] { country_suffix_prompt("stoves", ""); }), ErrorKind::EmptyCountry);
  EXPECT_EQ(kind_of([] { country_suffix_prompt("", "Peru"); }), ErrorKind::EmptyLabel);
}

TEST(Prompts, IncomeSuffixes) {
  const auto& syn = SynonymSet::defaults();
  const auto rich = income_suffix_prompts("stoves", IncomeCategory::Rich, syn);
  const auto poor = income_suffix_prompts("stoves", IncomeCategory::Poor, syn);
  const auto neutral = income_suffix_prompts("stoves", IncomeCategory::Neutral, syn);
  auto contains = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  EXPECT_TRUE(contains(rich, "This is a photo of stoves from a rich country"));
  EXPECT_TRUE(contains(poor, "This is a photo of stoves from an impoverished country"));
  EXPECT_TRUE(contains(neutral, "This is a photo of stoves from a country"));
  EXPECT_TRUE(contains(neutral, "This is a photo of stoves from a home"));
  EXPECT_EQ(rich.size(), syn.phrases(IncomeCategory::Rich).size());
}

TEST(Prompts, TranslatedLookup) {
  TranslationManifest m;
  m.entries[{"t1", "fra_Latn"}] = "Ceci est une photo de couverts";
  EXPECT_EQ(translated_prompt("t1", "fra_Latn", m), "Ceci est une photo de couverts");
  EXPECT_EQ(kind_of([&] { translated_prompt("t1", "spa_Latn", m); }), ErrorKind::MissingTranslation);
}

TEST(Prompts, SynonymSetValidation) {
  EXPECT_EQ(kind_of([] { SynonymSet::parse(R"({"posh": ["x"]})", "mem"); }), ErrorKind::UnknownCategory);
  EXPECT_EQ(kind_of([] { SynonymSet::parse(R"({"poor": []})", "mem"); }), ErrorKind::SchemaViolation);
  EXPECT_EQ(kind_of([] { SynonymSet::parse(R"({"poor": ["a", "a"]})", "mem"); }), ErrorKind::SchemaViolation);
  const auto custom = SynonymSet::parse(R"({"rich": ["a mansion"]})", "mem");
  EXPECT_FALSE(custom.has(IncomeCategory::Poor));
  EXPECT_EQ(kind_of([&] { custom.phrases(IncomeCategory::Poor); }), ErrorKind::UnknownCategory);
  EXPECT_NE(custom.hash(), SynonymSet::defaults().hash());
  EXPECT_EQ(SynonymSet::parse(SynonymSet::defaults().canonical_json(), "mem").hash(), SynonymSet::defaults().hash());
  EXPECT_EQ(SynonymSet::defaults().hash().size(), 64u);
}

TEST(Prompts, KeysAndTags) {
  EXPECT_EQ(prompt_key(DefaultEnglish{}, "t1"), "default|t1");
  EXPECT_EQ(prompt_key(Translated{"fra_Latn"}, "t1"), "translated:fra_Latn|t1");
  EXPECT_EQ(prompt_key(CountrySuffix{"PE"}, "t2"), "country:PE|t2");
  EXPECT_EQ(prompt_key(IncomeSuffix{IncomeCategory::Neutral, 3}, "t2"), "income:neutral:3|t2");
}

TEST(Prompts, PlanCoversTopicsLanguagesCountries) {
  const Metadata meta = small_meta();
  TranslationManifest m;
  for (const char* t : {"t1", "t2"}) {
    m.entries[{t, "fra_Latn"}] = std::string("fr ") + t;
    m.entries[{t, "spa_Latn"}] = std::string("es ") + t;
  }
  const auto plan = build_prompt_plan(meta, SynonymSet::defaults(), &m);
  // per topic: 1 default + 2 languages (CM fra, PE spa; LR has none) + 3 countries + 12 income
  EXPECT_EQ(plan.size(), 2u * (1 + 2 + 3 + 12));
  std::set<std::string> keys;
  for (const auto& v : plan) keys.insert(v.key());
  EXPECT_EQ(keys.size(), plan.size());
  EXPECT_TRUE(keys.count("country:LR|t1"));
  EXPECT_FALSE(keys.count("default|t3"));  // subjective topic never gets prompts

  const auto j = prompt_plan_to_json(plan);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j[0]["key"], "default|t1");
  EXPECT_EQ(j[0]["family"], "default");
  EXPECT_EQ(j[0]["topic_id"], "t1");
  EXPECT_EQ(j[0]["text"], "This is a photo of cutlery");

  m.entries.erase({"t2", "spa_Latn"});
  EXPECT_EQ(kind_of([&] { build_prompt_plan(meta, SynonymSet::defaults(), &m); }), ErrorKind::MissingTranslation);
  EXPECT_EQ(kind_of([&] { build_prompt_plan(meta, SynonymSet::defaults(), nullptr); }),
            ErrorKind::MissingTranslation);
  PromptPlanOptions no_translations;
  no_translations.translated = false;
  EXPECT_NO_THROW(build_prompt_plan(meta, SynonymSet::defaults(), nullptr, no_translations));
}

TEST(Prompts, ResolveNamesFirstMissingKey) {
  const Metadata meta = small_meta();
  PromptPlanOptions only_default{true, false, false, false};
  auto plan = build_prompt_plan(meta, SynonymSet::defaults(), nullptr, only_default);
  ASSERT_EQ(plan.size(), 2u);
  EmbeddingStore store(2, {"default|t1"}, {1.0f, 0.0f}, true, "x");
  try {
    resolve_prompts(plan, store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnresolvedPrompt);
    EXPECT_EQ(e.subject(), "default|t2");
  }
  EmbeddingStore full(2, {"default|t2", "default|t1"}, {1.0f, 0.0f, 0.0f, 1.0f}, true, "x");
  resolve_prompts(plan, full);
  EXPECT_EQ(plan[0].embedding_row, 1u);
  EXPECT_EQ(plan[1].embedding_row, 0u);
}
