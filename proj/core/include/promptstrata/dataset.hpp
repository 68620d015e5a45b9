#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "promptstrata/embedding_store.hpp"
#include "promptstrata/ingest.hpp"
#include "promptstrata/prompts.hpp"
#include "promptstrata/strata.hpp"

namespace promptstrata {

/// Everything an evaluation reads. Immutable once assembled, so workers can
/// share it freely.
struct Dataset {
  Metadata meta;  // images carry bound embedding rows
  EmbeddingStore image_embeddings;
  EmbeddingStore prompt_embeddings;
  SynonymSet synonyms = SynonymSet::defaults();
  QuartileEdges edges;
};

/// Which records feed compute_quartile_edges.
enum class EdgePopulation : std::uint8_t {
  All,        // every loaded image record
  Filtered,   // records whose topic is not subjective
};

/// Sets ImageRecord::embedding_row for every image. Throws MissingEmbedding
/// naming the first image id without a row.
void bind_image_rows(Metadata& meta, const EmbeddingStore& images);

/// Dim and space_tag must agree between the two stores. Throws
/// DimensionMismatch or SpaceMismatch.
void check_compatible(const EmbeddingStore& images, const EmbeddingStore& prompts);

QuartileEdges edges_from_metadata(const Metadata& meta, EdgePopulation population);

/// Conventional file names inside a data directory.
struct DataLayout {
  std::filesystem::path images;
  std::filesystem::path topics;
  std::optional<std::filesystem::path> countries;
  std::optional<std::filesystem::path> translations;
  std::optional<std::filesystem::path> synonyms;
  std::optional<std::filesystem::path> edges;
  std::filesystem::path image_embeddings;
  std::filesystem::path prompt_embeddings;

  /// images.csv, topics.csv, image_embeddings.bin, prompt_embeddings.bin and,
  /// when present on disk, countries.csv, translations.json, synonyms.json,
  /// edges.json.
  static DataLayout in_directory(const std::filesystem::path& dir);
};

struct LoadOptions {
  /// Explicit edges override both layout.edges and the computed quartiles.
  std::optional<QuartileEdges> edges;
  EdgePopulation edge_population = EdgePopulation::All;
};

/// Loads, binds and checks a dataset. Edges come from `options.edges`, then
/// `layout.edges`, then the loaded incomes.
Dataset load_dataset(const DataLayout& layout, const LoadOptions& options = {});

}  // namespace promptstrata
