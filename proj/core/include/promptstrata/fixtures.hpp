#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptstrata/dataset.hpp"
#include "promptstrata/plan.hpp"
#include "promptstrata/recall_table.hpp"

namespace promptstrata::fixtures {

/// Parameters of a synthetic dataset with planted topic structure.
///
/// Topic t owns basis direction e_t; the dims past n_topics form a free
/// subspace. Every image of topic t is a unit vector with component alpha on
/// e_t, alpha >= margin + noise_scale, components of magnitude <= noise_scale
/// on the other topic directions, and the rest of its norm in the free
/// subspace. The default prompt of topic t is e_t, so it scores every
/// ground-truth image at least `margin` above every other image. Other prompt
/// variants are rho * e_t + sqrt(1 - rho^2) * z with z a random unit vector of
/// the free subspace and rho drawn from `variant_alignment`.
struct PlantedSpec {
  std::uint64_t seed = 1;
  std::size_t n_topics = 4;
  std::size_t images_per_stratum = 2;  // per (topic, country, income class)
  std::size_t dim = 8;
  double margin = 0.3;
  double noise_scale = 0.1;
  std::vector<std::string> countries{"BI", "IN", "CN", "FR"};
  double alignment_min = 0.0;
  double alignment_max = 0.9;
  /// Probability that a (country, income class) stratum has no images.
  double stratum_dropout = 0.0;
  /// Extra topics flagged subjective; their images stay out of the pool.
  std::size_t subjective_topics = 0;
  /// Leading phrases kept per synonym category.
  std::size_t synonyms_per_category = 4;
  /// Non-default prompt families to emit: "translated", "country", "income".
  std::vector<std::string> prompt_families{"translated", "country", "income"};

  /// Throws InvalidSpec.
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing fields keep their defaults. Throws InvalidSpec.
  static PlantedSpec from_json(const nlohmann::json& j);
};

struct Fixture {
  PlantedSpec spec;
  Metadata meta;
  TranslationManifest translations;
  SynonymSet synonyms;
  QuartileEdges edges;
  std::size_t dim = 0;
  std::string space_tag;
  std::vector<std::string> image_ids;
  std::vector<float> image_values;  // raw, positively scaled per row
  std::vector<std::string> prompt_ids;
  std::vector<float> prompt_values;  // raw, positively scaled per row
  ExperimentPlan planted_plan;       // axes [image_income_class, country], baseline only
  RecallTable expected;              // recall 1.0 in every cell of planted_plan
};

/// Deterministic for a given spec. The random stream is std::mt19937_64
/// seeded with `spec.seed`; uniforms use the top 53 bits and normals are
/// Irwin-Hall sums of twelve uniforms minus six.
Fixture generate(const PlantedSpec& spec);

/// Writes the ingest wire formats into `dir`: images.csv, topics.csv,
/// countries.csv, translations.json, synonyms.json, edges.json,
/// image_embeddings.{bin,json}, prompt_embeddings.{bin,json}, plus spec.json,
/// planted_plan.json and expected_table.json.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

/// Builds the in-memory dataset a loader would produce from the written files.
Dataset to_dataset(const Fixture& fixture);

inline constexpr std::size_t kOracleMaxImages = 500;

/// Recomputes a RecallTable by naive enumeration: full sorts per prompt,
/// explicit id sets per topic and group. Throws TooLarge above 500 images.
RecallTable oracle_evaluate(const Dataset& data, const ExperimentPlan& plan);

}  // namespace promptstrata::fixtures
