// OpenMP kernels against their serial counterparts. The thread count of the
// parallel variants is whatever OMP_NUM_THREADS allows.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "rcv/inference.hpp"
#include "rcv/lagged_occupation.hpp"
#include "rcv/occupation.hpp"
#include "rcv/study.hpp"
#include "rcv/sv_simulator.hpp"

using namespace rcv;

namespace {

VolPairSeries series_for(int days) {
  SimConfig c;
  c.days = days;
  c.inner_steps_per_day = 390;
  c.seed = 77;
  return realized_series(simulate(c), 78);
}

// Occupation thresholds at the 5x5 inference lattice in value space.
std::vector<OccupationPoint> lattice_points(const VolPairSeries& s) {
  const Marginal fx(s.x);
  const Marginal gy(s.y);
  std::vector<OccupationPoint> out;
  for (double u : inference_lattice()) {
    for (double v : inference_lattice()) out.push_back({fx.quantile(u), gy.quantile(v)});
  }
  return out;
}

void BM_CovarianceParallel(benchmark::State& state) {
  const auto s = series_for(static_cast<int>(state.range(0)));
  const auto pts = lattice_points(s);
  for (auto _ : state) benchmark::DoNotOptimize(lagged_occupation_covariance(s, pts, kDefaultXi));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_CovarianceReference(benchmark::State& state) {
  const auto s = series_for(static_cast<int>(state.range(0)));
  const auto pts = lattice_points(s);
  for (auto _ : state) benchmark::DoNotOptimize(lagged_occupation_covariance_reference(s, pts, kDefaultXi));
}

void mixture(benchmark::State& state, int threads) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  std::vector<double> eig;
  for (int k = 1; k <= 25; ++k) eig.push_back(1.0 / (k * k));
  for (auto _ : state) benchmark::DoNotOptimize(mixture_p_value(eig, 0.8, 5000, 3));
  omp_set_num_threads(saved);
}

void BM_MixtureParallel(benchmark::State& state) { mixture(state, omp_get_max_threads()); }
void BM_MixtureSerial(benchmark::State& state) { mixture(state, 1); }

void study(benchmark::State& state, int threads) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  StudyDesign d;
  d.base.inner_steps_per_day = 390;
  d.base.seed = 5;
  d.replications = 8;
  const std::vector<int> ns{78};
  const std::vector<int> spans{250};
  for (auto _ : state) benchmark::DoNotOptimize(rmse_study(d, ns, spans));
  omp_set_num_threads(saved);
}

void BM_RmseStudyParallel(benchmark::State& state) { study(state, omp_get_max_threads()); }
void BM_RmseStudySerial(benchmark::State& state) { study(state, 1); }

}  // namespace

BENCHMARK(BM_CovarianceParallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovarianceReference)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MixtureParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MixtureSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RmseStudyParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RmseStudySerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
