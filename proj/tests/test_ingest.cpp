#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "promptstrata/error.hpp"
#include "promptstrata/ingest.hpp"
#include "support.hpp"

using namespace promptstrata;
using testing_support::TempDir;
using testing_support::read_text;
using testing_support::write_text;

namespace {

constexpr const char* kTopics =
    "topic_id,label,subjective\n"
    "t1,cutlery,0\n"
    "t2,toilet paper,0\n"
    "t3,favourite thing,1\n";

std::string images_csv(const std::vector<std::string>& rows) {
  std::string out = "image_id,country_code,monthly_income_usd,topic_id\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::BadArgument;
}

}  // namespace

TEST(Ingest, ThreeRowMetadataLoadsThreeRecords) {
  TempDir dir("ingest_three");
  write_text(dir / "topics.csv", kTopics);
  write_text(dir / "images.csv", images_csv({"a,BI,26.9,t1", "b,CH,19671.0,t2", "c,IN,95.0,t1"}));
  const Metadata meta = load_metadata({dir / "images.csv", dir / "topics.csv", std::nullopt});
  ASSERT_EQ(meta.images.size(), 3u);
  EXPECT_EQ(meta.images[0].image_id, "a");
  EXPECT_EQ(meta.images[1].country_code, "CH");
  EXPECT_DOUBLE_EQ(meta.images[2].monthly_income_usd, 95.0);
  EXPECT_EQ(meta.topics.size(), 3u);
  EXPECT_TRUE(meta.topics.at("t3").subjective);
}

TEST(Ingest, NegativeIncomeIsSchemaViolation) {
  TempDir dir("ingest_negative");
  write_text(dir / "topics.csv", kTopics);
  write_text(dir / "images.csv", images_csv({"a,BI,-5,t1"}));
  try {
    load_metadata({dir / "images.csv", dir / "topics.csv", std::nullopt});
    FAIL() << "expected SchemaViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaViolation);
    EXPECT_NE(e.subject().find("monthly_income_usd"), std::string::npos);
  }
}

TEST(Ingest, RejectsBadRows) {
  TempDir dir("ingest_bad");
  write_text(dir / "topics.csv", kTopics);
  const auto load = [&](const std::string& row) {
    write_text(dir / "images.csv", images_csv({row}));
    return kind_of([&] { load_metadata({dir / "images.csv", dir / "topics.csv", std::nullopt}); });
  };
  EXPECT_EQ(load("a,ZZ,10,t1"), ErrorKind::UnknownCountry);
  EXPECT_EQ(load("a,BI,10,t9"), ErrorKind::UnknownTopic);
  EXPECT_EQ(load("a,BI,abc,t1"), ErrorKind::SchemaViolation);
  EXPECT_EQ(load(",BI,10,t1"), ErrorKind::SchemaViolation);
  EXPECT_EQ(load("a,BI,10"), ErrorKind::SchemaViolation);

  write_text(dir / "images.csv", images_csv({"a,BI,10,t1", "a,IN,20,t2"}));
  EXPECT_EQ(kind_of([&] { load_metadata({dir / "images.csv", dir / "topics.csv", std::nullopt}); }),
            ErrorKind::DuplicateImageId);
}

TEST(Ingest, MissingFileNamesPath) {
  TempDir dir("ingest_missing");
  try {
    load_topics(dir / "nope.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingFile);
    EXPECT_NE(e.subject().find("nope.csv"), std::string::npos);
  }
}

TEST(Ingest, WrongHeaderIsSchemaViolation) {
  TempDir dir("ingest_header");
  write_text(dir / "topics.csv", "id,label,subjective\nt1,cutlery,0\n");
  EXPECT_EQ(kind_of([&] { load_topics(dir / "topics.csv"); }), ErrorKind::SchemaViolation);
}

TEST(Ingest, WriteOfLoadIsByteIdentical) {
  TempDir dir("ingest_roundtrip");
  write_text(dir / "topics.csv", kTopics);
  write_text(dir / "images.csv", images_csv({"a,BI,26.9,t1", "b,CH,19671,t2", "c,IN,95.01,t1"}));
  const Metadata meta = load_metadata({dir / "images.csv", dir / "topics.csv", std::nullopt});
  write_images(dir / "images2.csv", meta.images);
  write_topics(dir / "topics2.csv", meta.topics);
  EXPECT_EQ(read_text(dir / "images2.csv"), read_text(dir / "images.csv"));
  EXPECT_EQ(read_text(dir / "topics2.csv"), read_text(dir / "topics.csv"));

  write_countries(dir / "countries.csv", CountryTable::bundled());
  const CountryTable reread = load_countries(dir / "countries.csv");
  EXPECT_EQ(reread.profiles(), CountryTable::bundled().profiles());
  write_countries(dir / "countries2.csv", reread);
  EXPECT_EQ(read_text(dir / "countries2.csv"), read_text(dir / "countries.csv"));
}

TEST(Ingest, LoadingIsPermutationInvariant) {
  TempDir dir("ingest_perm");
  write_text(dir / "topics.csv", kTopics);
  std::vector<std::string> rows;
  const std::vector<std::string> codes{"BI", "IN", "CN", "FR", "PE"};
  for (int i = 0; i < 40; ++i) {
    rows.push_back("img" + std::to_string(100 + i) + "," + codes[i % 5] + "," + std::to_string(10 + 37 * i) +
                   ",t" + std::to_string(1 + i % 3));
  }
  write_text(dir / "images.csv", images_csv(rows));
  const Metadata reference = load_metadata({dir / "images.csv", dir / "topics.csv", std::nullopt});
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(rows.begin(), rows.end(), rng);
    write_text(dir / "images.csv", images_csv(rows));
    const Metadata m = load_metadata({dir / "images.csv", dir / "topics.csv", std::nullopt});
    EXPECT_EQ(m.images, reference.images);
  }
}

TEST(Ingest, QuotedFieldsAndCrlf) {
  TempDir dir("ingest_quoted");
  write_text(dir / "topics.csv", "topic_id,label,subjective\r\nt1,\"knives, forks\",0\r\nt2,\"the \"\"good\"\" one\",0\r\n");
  const TopicCatalog t = load_topics(dir / "topics.csv");
  EXPECT_EQ(t.at("t1").label, "knives, forks");
  EXPECT_EQ(t.at("t2").label, "the \"good\" one");
  write_topics(dir / "out.csv", t);
  EXPECT_EQ(load_topics(dir / "out.csv").entries(), t.entries());
}

TEST(Ingest, TranslationsParse) {
  const auto m = parse_translations(
      R"({"t1|fra_Latn": "couverts", "t1|hin_Deva": "कटलरी", "@source_model": "nllb", "@chrf": {"fra_Latn": 61.5}})",
      "mem");
  ASSERT_NE(m.find("t1", "fra_Latn"), nullptr);
  EXPECT_EQ(*m.find("t1", "fra_Latn"), "couverts");
  EXPECT_EQ(m.find("t2", "fra_Latn"), nullptr);
  EXPECT_EQ(m.source_model_tag, "nllb");
  EXPECT_DOUBLE_EQ(m.chrf_scores.at("fra_Latn"), 61.5);

  EXPECT_EQ(kind_of([] { parse_translations(R"({"t1": "x"})", "mem"); }), ErrorKind::SchemaViolation);
  EXPECT_EQ(kind_of([] { parse_translations(R"({"t1|fra_Latn": ""})", "mem"); }), ErrorKind::SchemaViolation);
  EXPECT_EQ(kind_of([] { parse_translations("[1,2]", "mem"); }), ErrorKind::SchemaViolation);
  EXPECT_EQ(kind_of([] { parse_translations("{", "mem"); }), ErrorKind::SchemaViolation);
}

TEST(Ingest, TranslationsRoundTrip) {
  TempDir dir("ingest_translations");
  TranslationManifest m;
  m.entries[{"t1", "fra_Latn"}] = "couverts";
  m.entries[{"t2", "spa_Latn"}] = "papel higiénico";
  m.source_model_tag = "nllb-200";
  write_translations(dir / "tr.json", m);
  const auto back = load_translations(dir / "tr.json");
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_EQ(back.source_model_tag, m.source_model_tag);
}

TEST(Ingest, BundledCountryTable) {
  const auto& table = CountryTable::bundled();
  EXPECT_GE(table.size(), 60u);
  const auto& bi = table.at("BI");
  EXPECT_EQ(bi.display_name, "Burundi");
  EXPECT_EQ(bi.major_language, "fra_Latn");
  EXPECT_FALSE(table.at("LR").major_language.has_value());
  EXPECT_EQ(kind_of([&] { table.at("ZZ"); }), ErrorKind::UnknownCountry);
}

TEST(Ingest, TopicCatalogRejectsDuplicateLabels) {
  std::map<std::string, TopicEntry> entries{{"t1", {"cutlery", false}}, {"t2", {"cutlery", false}}};
  EXPECT_EQ(kind_of([&] { TopicCatalog c(entries); }), ErrorKind::SchemaViolation);
  TopicCatalog ok({{"t1", {"cutlery", false}}, {"t2", {"mood", true}}});
  EXPECT_EQ(ok.filtered().size(), 1u);
}
