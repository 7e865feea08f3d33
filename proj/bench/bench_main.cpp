// Timing harness: serial reference sweep vs the OpenMP sweep on growing MDPs,
// plus the Monte-Carlo simulator throughput. The two solvers must agree bit
// for bit; the bench fails loudly if they drift apart.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wncs/mdp.hpp"
#include "wncs/policies.hpp"
#include "wncs/simulator.hpp"

using namespace wncs;
using clk = std::chrono::steady_clock;

namespace {

double ms_between(clk::time_point a, clk::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

PlantModel one_step_plant() {
  const Mat A(2, 2, {1.1, 0.2, 0.2, 0.8});
  const Mat B(2, 2, {-1.0, 0.0, 0.0, -1.0});
  return make_plant(A, B, A, identity(2), identity(2), 1);
}

PlantModel two_step_plant() {
  const Mat A(2, 2, {1.1, 0.2, 0.2, 0.8});
  const Mat B(2, 1, {-1.0, -1.0});
  const Mat K(1, 2, {2.9, -1.0});
  return make_plant(A, B, K, identity(2), identity(2), 2);
}

struct SolveCase {
  std::string name;
  TruncatedSpace space;
  Kernel kernel;
};

void bench_solver(const SolveCase& c, int repeat) {
  double serial_ms = 0.0, parallel_ms = 0.0;
  RviResult rs, rp;
  for (int r = 0; r < repeat; ++r) {
    auto t0 = clk::now();
    rs = solve_rvi(c.kernel, 1e-8, 100000, /*parallel=*/false);
    auto t1 = clk::now();
    rp = solve_rvi(c.kernel, 1e-8, 100000, /*parallel=*/true);
    auto t2 = clk::now();
    serial_ms += ms_between(t0, t1);
    parallel_ms += ms_between(t1, t2);
  }
  serial_ms /= repeat;
  parallel_ms /= repeat;
  const bool same = std::memcmp(&rs.gain, &rp.gain, sizeof(double)) == 0 &&
                    rs.iterations == rp.iterations && rs.bias == rp.bias;
  std::printf("%-28s %9d states %6ld iters  serial %9.2f ms  omp %9.2f ms  x%.2f  %s\n",
              c.name.c_str(), c.space.n_states, rp.iterations, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              same ? "identical" : "MISMATCH");
}

void bench_simulator(const PlantModel& p, const char* name, long horizon, int reps) {
  ExperimentConfig cfg;
  cfg.plant = &p;
  cfg.channel = StaticChannel{0.1, 0.1};
  cfg.policy = PersistentPolicy{};
  cfg.horizon = horizon;
  cfg.replications = reps;
  cfg.seed = 1;
  cfg.x0 = Vec{1.0, -1.0};
  const auto t0 = clk::now();
  const SimResult res = run(cfg);
  const auto t1 = clk::now();
  const double ms = ms_between(t0, t1);
  const double slots = static_cast<double>(horizon) * reps;
  std::printf("%-28s %9.0f slot-steps     %9.2f ms  %8.1f Msteps/s  (mean %.4f)\n",
              name, slots, ms, slots / ms / 1e3, res.mean_cost);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("omp threads: %d\n", omp_get_max_threads());
#else
  std::printf("omp threads: built without OpenMP\n");
#endif

  const PlantModel p1 = one_step_plant();
  const PlantModel p2 = two_step_plant();
  const FTable f1(p1, 20), f2(p2, 20);
  const StaticChannel st{0.1, 0.1};
  const MarkovChannel mk{{0.1, 0.4}, {0.1, 0.4},
                         Mat(2, 2, {0.5, 0.5, 0.5, 0.5}),
                         Mat(2, 2, {0.5, 0.5, 0.5, 0.5})};

  SolveCase cases[3];
  cases[0].name = "one-step static (L=20)";
  cases[0].space = TruncatedSpace::make(20, 1);
  cases[0].kernel = build_kernel(cases[0].space, p1, st, f1);
  cases[1].name = "one-step fading 2x2 (L=20)";
  cases[1].space = TruncatedSpace::make(20, 1, 2, 2);
  cases[1].kernel = build_kernel(cases[1].space, p1, mk, f1);
  cases[2].name = "two-step static (L=20)";
  cases[2].space = TruncatedSpace::make(20, 2);
  cases[2].kernel = build_kernel(cases[2].space, p2, st, f2);

  bench_solver(cases[0], 5);
  bench_solver(cases[1], 5);
  bench_solver(cases[2], 1);

  bench_simulator(p1, "simulate one-step 10k x 100", 10000, 100);
  bench_simulator(p2, "simulate two-step 10k x 100", 10000, 100);
  return 0;
}
