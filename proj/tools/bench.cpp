// Benchmark comparing the OpenMP batch kernels against the serial reference:
// path simulation and the per-step regression sweep.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dmr/condexp.hpp"
#include "dmr/model.hpp"
#include "dmr/simulate.hpp"

using namespace dmr;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double bench_simulate(bool parallel, const ModelSpec& model, const TimeGrid& grid, int n_paths) {
  const auto t0 = clock_type::now();
  SimBatch b = parallel ? simulate_batch(model, grid, n_paths, 7)
                        : simulate_batch_serial(model, grid, n_paths, 7);
  double sink = b.x_val.back();
  (void)sink;
  return seconds_since(t0);
}

double bench_regression(const ModelSpec& model, const TimeGrid& grid, int n_paths) {
  SimBatch b = simulate_batch(model, grid, n_paths, 7);
  FeatureBasis basis = FeatureBasis::from_strings("polynomial", 2, {0, 1, 2, 4}, 1.0);
  const auto t0 = clock_type::now();
  const StateBatchView xs = b.x_view();
  for (int k = 8; k < grid.n_steps; k += 8) {
    StepDesign d = build_step_design(xs, basis, k);
    Eigen::MatrixXd y(n_paths, 1);
    for (int i = 0; i < n_paths; ++i) y(i, 0) = xs.at(i, k, 0);
    MultiRegressionFit fit = fit_from_design(d, basis, y);
    Eigen::MatrixXd pred = predict_in_sample(d, fit);
    volatile double sink = pred(0, 0);
    (void)sink;
  }
  return seconds_since(t0);
}

}  // namespace

int main(int argc, char** argv) {
  int n_paths = argc > 1 ? std::atoi(argv[1]) : 100000;
  const TimeGrid grid = make_grid(64);
  const ModelSpec m3 = builtin_model("M3_rotating_frame");

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("paths=%d steps=%d model=%s threads=%d\n", n_paths, grid.n_steps, m3.name.c_str(),
              threads);

  // Warm-up, then timed runs.
  bench_simulate(true, m3, grid, n_paths / 10);
  const double ts = bench_simulate(false, m3, grid, n_paths);
  const double tp = bench_simulate(true, m3, grid, n_paths);
  std::printf("simulate   serial %.3fs  openmp %.3fs  speedup %.2fx\n", ts, tp, ts / tp);

  const double tr = bench_regression(m3, grid, n_paths);
  std::printf("regression sweep (8 steps) %.3fs\n", tr);
  return 0;
}
