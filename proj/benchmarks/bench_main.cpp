#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "fairhil/causal.hpp"
#include "fairhil/metrics.hpp"
#include "fairhil/model.hpp"
#include "fairhil/similarity.hpp"
#include "fairhil/synth.hpp"

using namespace fairhil;

namespace {

const DataTable& loans(std::size_t rows) {
  static std::map<std::size_t, DataTable> cache;
  auto it = cache.find(rows);
  if (it == cache.end()) it = cache.emplace(rows, synth_loans(42, rows)).first;
  return it->second;
}

void BM_Scatter(benchmark::State& state) {
  const DataTable& t = loans(static_cast<std::size_t>(state.range(0)));
  const SimilarityIndex index(t);
  std::size_t row = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scatter(index, t, row, View::kDataset));
    row = (row + 1) % t.rows();
  }
}
BENCHMARK(BM_Scatter)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SimilarityIndex(benchmark::State& state) {
  const DataTable& t = loans(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(SimilarityIndex(t));
}
BENCHMARK(BM_SimilarityIndex)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MetricSuite(benchmark::State& state) {
  const DataTable& t = loans(5000);
  const Outcomes y = t.outcomes();
  const MetricContext ctx{t, View::kDataset, y, y};
  const GroupSpec g = default_privileged(t, "citizenship");
  for (auto _ : state) benchmark::DoNotOptimize(metric_suite(ctx, g, all_metric_kinds()));
}
BENCHMARK(BM_MetricSuite)->Unit(benchmark::kMicrosecond);

void BM_SpdRangeAllFeatures(benchmark::State& state) {
  const DataTable& t = loans(5000);
  const Outcomes y = t.outcomes();
  for (auto _ : state) {
    for (const auto& f : t.features()) benchmark::DoNotOptimize(spd_range(t, f, y));
  }
}
BENCHMARK(BM_SpdRangeAllFeatures)->Unit(benchmark::kMillisecond);

void BM_Acyclicity(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 0.3);
  Eigen::MatrixXd w(d, d);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(acyclicity_with_gradient(w));
}
BENCHMARK(BM_Acyclicity)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_LearnStructureLoans(benchmark::State& state) {
  const DataTable& t = loans(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_causal_graph(t, StructureConfig{}));
}
BENCHMARK(BM_LearnStructureLoans)->Arg(1000)->Unit(benchmark::kSecond)->Iterations(1);

void BM_TrainLogistic(benchmark::State& state) {
  const DataTable& t = loans(5000);
  for (auto _ : state) benchmark::DoNotOptimize(train_and_evaluate(t, SplitSpec{0, 0.2}));
}
BENCHMARK(BM_TrainLogistic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
