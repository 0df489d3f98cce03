// Serial vs OpenMP timing of the torque grid and torque Jacobian kernels.
//
//   bench_kernels [config.json] [--points N] [--reps R]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include <CLI11.hpp>

#include "flatplan/config.hpp"
#include "flatplan/kernels.hpp"

using namespace flatplan;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel timing"};
  std::string config = FLATPLAN_CONFIG_DIR "/six_dof_generic.json";
  int points = 400, reps = 5;
  app.add_option("config", config, "problem configuration");
  app.add_option("--points", points, "grid points")->check(CLI::Range(2, 1000000));
  app.add_option("--reps", reps, "repetitions (best is reported)")->check(CLI::Range(1, 1000));
  CLI11_PARSE(app, argc, argv);

  const PlanningProblem pb = load_problem_file(config);
  const DecisionLayout layout{pb.model.dof(), pb.spec.m};
  const GridBasis grid = tabulate(pb.spec, uniform_grid(points));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(layout.size());
  for (int k = 0; k < x.size(); ++k) x(k) = u(rng);
  x(layout.tf()) = 1.0;

  std::printf("%s: n = %d, m = %d, %d points, %d threads, best of %d\n", config.c_str(), layout.n, layout.m, points,
              omp_get_max_threads(), reps);

  Eigen::MatrixXd a, b;
  const double ts = best_of(reps, [&] { a = torque_grid_serial(pb.model, grid, layout, x); });
  const double tp = best_of(reps, [&] { b = torque_grid_parallel(pb.model, grid, layout, x); });
  std::printf("torque grid     serial %9.3f ms  parallel %9.3f ms  speedup %5.2f  identical %s\n", 1e3 * ts,
              1e3 * tp, ts / tp, (a.array() == b.array()).all() ? "yes" : "NO");

  const double js = best_of(reps, [&] { a = torque_jacobian_serial(pb.model, grid, layout, x); });
  const double jp = best_of(reps, [&] { b = torque_jacobian_parallel(pb.model, grid, layout, x); });
  std::printf("torque jacobian serial %9.3f ms  parallel %9.3f ms  speedup %5.2f  identical %s\n", 1e3 * js,
              1e3 * jp, js / jp, (a.array() == b.array()).all() ? "yes" : "NO");
  std::printf("per-point inverse dynamics %.3f us\n", 1e6 * ts / points);
  return 0;
}
