// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "sparseglm/datafit.hpp"
#include "sparseglm/dataset.hpp"
#include "sparseglm/kernels.hpp"
#include "sparseglm/penalty.hpp"

using namespace sparseglm;

namespace {

struct Fixture {
  SyntheticProblem prob;
  Datafit df;
  std::vector<double> beta, cache;

  Fixture(int n, int p)
      : prob(make(n, p)), df(Datafit::quadratic(prob.data)), beta(prob.true_coef), cache(df.init_cache(beta)) {}

  static SyntheticProblem make(int n, int p) {
    SyntheticSpec spec;
    spec.n_samples = n;
    spec.n_features = p;
    spec.n_nonzero = p / 20;
    return generate_correlated_gaussian(spec);
  }
};

const Fixture& fixture(int n, int p) {
  static const Fixture f(n, p);
  return f;
}

template <std::vector<double> (*Kernel)(const Datafit&, std::span<const double>)>
void BM_FullGradient(benchmark::State& state) {
  const auto& f = fixture(1000, 5000);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.df, f.cache));
  state.counters["threads"] = omp_get_max_threads();
}

template <std::vector<double> (*Kernel)(const Datafit&, const Penalty&, std::span<const double>,
                                        std::span<const double>, kernels::ScoreKind)>
void BM_Scores(benchmark::State& state) {
  const auto& f = fixture(1000, 5000);
  const Penalty pen(Mcp{0.1, 3.0});
  const auto kind = static_cast<kernels::ScoreKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.df, pen, f.beta, f.cache, kind));
  state.counters["threads"] = omp_get_max_threads();
}

template <std::vector<double> (*Kernel)(const DesignMatrix&)>
void BM_ColumnNorms(benchmark::State& state) {
  const auto& f = fixture(1000, 5000);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.prob.data.X));
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK_TEMPLATE(BM_FullGradient, kernels::full_gradient_serial)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_FullGradient, kernels::full_gradient_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Scores, kernels::scores_serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Scores, kernels::scores_parallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ColumnNorms, kernels::column_squared_norms_serial)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ColumnNorms, kernels::column_squared_norms_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
