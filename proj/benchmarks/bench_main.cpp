#include <sstream>

#include <benchmark/benchmark.h>

#include "aprs/evaluation.hpp"
#include "aprs/ingestion.hpp"
#include "aprs/pca.hpp"
#include "aprs/rng.hpp"
#include "aprs/synthgen.hpp"

using namespace aprs;

namespace {

SyntheticCohort cohort(std::size_t per_population, std::size_t snps) {
  auto cfg = ScenarioConfig::confounded_default();
  for (auto& p : cfg.populations) p.n_samples = per_population;
  cfg.n_ancestry_snps = snps;
  return generate_cohort(cfg);
}

void BM_FitPca(benchmark::State& state) {
  const auto c = cohort(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto s = standardize(filter_by_panel(c.genotypes, c.panel).matrix);
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(s, 20));
}
BENCHMARK(BM_FitPca)->Args({100, 500})->Args({200, 2000})->Args({1000, 500})->Unit(benchmark::kMillisecond);

void BM_ParseVcf(benchmark::State& state) {
  const auto c = cohort(static_cast<std::size_t>(state.range(0)), 2000);
  std::ostringstream out;
  write_vcf(c.genotypes, out);
  const std::string text = out.str();
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(parse_vcf(in));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseVcf)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  Rng rng(1, 0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::vector<bool> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.normal();
    y[i] = rng.bernoulli(0.3);
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s, y));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
