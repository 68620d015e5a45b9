#include <benchmark/benchmark.h>

#include <random>

#include "promptstrata/engine.hpp"
#include "promptstrata/fixtures.hpp"
#include "promptstrata/stats.hpp"

using namespace promptstrata;

namespace {

EmbeddingStore random_store(std::size_t rows, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<std::string> ids;
  std::vector<float> values;
  for (std::size_t r = 0; r < rows; ++r) {
    ids.push_back("img" + std::to_string(r));
    for (std::size_t d = 0; d < dim; ++d) values.push_back(g(rng));
  }
  return EmbeddingStore(dim, std::move(ids), std::move(values), false, "bench");
}

void BM_AlignmentScores(benchmark::State& state) {
  const auto images = random_store(static_cast<std::size_t>(state.range(0)), 512);
  const auto prompt = random_store(1, 512);
  for (auto _ : state) benchmark::DoNotOptimize(alignment_scores(images, prompt.row(0)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AlignmentScores)->Arg(1000)->Arg(10000)->Arg(40000);

void BM_TopN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> scores(n);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = u(rng);
    ids.push_back("img" + std::to_string(i));
  }
  for (auto _ : state) benchmark::DoNotOptimize(topn_retrieve(scores, ids, 150));
}
BENCHMARK(BM_TopN)->Arg(10000)->Arg(40000);

void BM_WilcoxonExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(wilcoxon_signed_rank(a, b, WilcoxonMethod::ExactEnumeration));
}
BENCHMARK(BM_WilcoxonExact)->Arg(10)->Arg(25)->Arg(60);

void BM_RunExperiment(benchmark::State& state) {
  fixtures::PlantedSpec spec;
  spec.n_topics = 20;
  spec.dim = 64;
  spec.images_per_stratum = 6;
  spec.countries = {"BI", "IN", "CM", "CN", "PE", "FR", "CH"};
  const auto data = fixtures::to_dataset(fixtures::generate(spec));
  const auto plans = preset_plans(Preset::Rq2);
  const EngineOptions options{static_cast<std::size_t>(state.range(0))};
  for (auto _ : state)
    for (const auto& plan : plans) benchmark::DoNotOptimize(run_experiment(plan, data, options));
}
BENCHMARK(BM_RunExperiment)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
