#include "promptstrata/dataset.hpp"

#include <vector>

#include "promptstrata/error.hpp"

namespace promptstrata {

void bind_image_rows(Metadata& meta, const EmbeddingStore& images) {
  for (auto& img : meta.images) {
    auto row = images.find(img.image_id);
    if (!row) {
      throw Error(ErrorKind::MissingEmbedding,
                  "image '" + img.image_id + "' has no embedding row", img.image_id);
    }
    img.embedding_row = *row;
  }
}

void check_compatible(const EmbeddingStore& images, const EmbeddingStore& prompts) {
  if (images.dim() != prompts.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "image embeddings have dim " + std::to_string(images.dim()) +
                    " but prompt embeddings have dim " + std::to_string(prompts.dim()));
  }
  if (images.space_tag() != prompts.space_tag()) {
    throw Error(ErrorKind::SpaceMismatch,
                "embedding spaces differ: '" + images.space_tag() + "' vs '" + prompts.space_tag() + "'",
                prompts.space_tag());
  }
}

QuartileEdges edges_from_metadata(const Metadata& meta, EdgePopulation population) {
  std::vector<double> incomes;
  incomes.reserve(meta.images.size());
  for (const auto& img : meta.images) {
    if (population == EdgePopulation::Filtered && meta.topics.at(img.topic_id).subjective) continue;
    incomes.push_back(img.monthly_income_usd);
  }
  return compute_quartile_edges(incomes);
}

DataLayout DataLayout::in_directory(const std::filesystem::path& dir) {
  DataLayout l;
  l.images = dir / "images.csv";
  l.topics = dir / "topics.csv";
  l.image_embeddings = dir / "image_embeddings.bin";
  l.prompt_embeddings = dir / "prompt_embeddings.bin";
  auto optional_file = [&](const char* name) -> std::optional<std::filesystem::path> {
    auto p = dir / name;
    if (std::filesystem::exists(p)) return p;
    return std::nullopt;
  };
  l.countries = optional_file("countries.csv");
  l.translations = optional_file("translations.json");
  l.synonyms = optional_file("synonyms.json");
  l.edges = optional_file("edges.json");
  return l;
}

Dataset load_dataset(const DataLayout& layout, const LoadOptions& options) {
  Dataset d;
  d.meta = load_metadata({layout.images, layout.topics, layout.countries});
  d.image_embeddings = EmbeddingStore::load(layout.image_embeddings);
  d.prompt_embeddings = EmbeddingStore::load(layout.prompt_embeddings);
  check_compatible(d.image_embeddings, d.prompt_embeddings);
  bind_image_rows(d.meta, d.image_embeddings);
  if (layout.synonyms) d.synonyms = SynonymSet::load(*layout.synonyms);
  if (options.edges) {
    d.edges = *options.edges;
  } else if (layout.edges) {
    d.edges = load_edges(*layout.edges);
  } else {
    d.edges = edges_from_metadata(d.meta, options.edge_population);
  }
  return d;
}

}  // namespace promptstrata
