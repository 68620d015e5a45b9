#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "promptstrata/dataset.hpp"
#include "promptstrata/plan.hpp"
#include "promptstrata/recall_table.hpp"

namespace promptstrata {

/// Top-N result for one (topic, prompt) pair.
struct RetrievalRun {
  std::string topic_id;
  std::string prompt_key;
  std::size_t n = 0;
  std::vector<std::string> retrieved;  // best first
  std::vector<double> scores;          // parallel to `retrieved`, non-increasing
};

/// score_i = dot(image_i, prompt), accumulated in double. Throws
/// DimensionMismatch, or NotNormalized when the prompt is not unit length.
std::vector<double> alignment_scores(const EmbeddingStore& images, std::span<const float> prompt);

/// Dot product of two equal-length float vectors, accumulated left to right
/// in double.
double dot(std::span<const float> a, std::span<const float> b);

/// The n best entries, ties broken by ascending id. n larger than the pool
/// returns the whole pool. Throws EmptyPool.
RetrievalRun topn_retrieve(std::span<const double> scores, const std::vector<std::string>& ids,
                           std::size_t n);

/// |retrieved ∩ gt ∩ group| / |gt ∩ group|, or nullopt when the denominator
/// is zero.
std::optional<double> group_recall(const RetrievalRun& run, const std::set<std::string>& ground_truth,
                                   const std::set<std::string>& group);

struct EngineOptions {
  std::size_t workers = 1;
};

/// Scores, retrieves and aggregates one plan. Output does not depend on
/// `options.workers`.
RecallTable run_experiment(const ExperimentPlan& plan, const Dataset& data,
                           const EngineOptions& options = {});

/// Image ids of the retrieval pool (non-subjective topics), ascending.
std::vector<std::string> retrieval_pool(const Metadata& meta);

}  // namespace promptstrata
