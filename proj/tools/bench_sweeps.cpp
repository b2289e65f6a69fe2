// Times each OpenMP sweep against its serial twin and verifies that the two
// reductions agree bit for bit.

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "predfb/builtins.hpp"
#include "predfb/sweeps.hpp"

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
auto timed(F&& f, double* elapsed) {
  auto t0 = std::chrono::steady_clock::now();
  auto res = f();
  auto t1 = std::chrono::steady_clock::now();
  *elapsed = seconds(t0, t1);
  return res;
}

void print_row(const char* name, double serial_s, double parallel_s, bool match) {
  std::printf("%-22s %10.3fs %10.3fs %8.2fx   %s\n", name, serial_s, parallel_s,
              serial_s / parallel_s, match ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark the parallel sweeps against their serial twins."};
  int linear_cases = 200;
  int nonlinear_cases = 24;
  int decay_random = 8;
  int threads = 0;
  app.add_option("--linear-cases", linear_cases, "linear bound sweep cases");
  app.add_option("--nonlinear-cases", nonlinear_cases, "nonlinear bound sweep cases");
  app.add_option("--decay-cases", decay_random, "random schedules in the decay sweep");
  app.add_option("--threads", threads, "OpenMP thread count (0: default)");
  CLI11_PARSE(app, argc, argv);
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  (void)threads;
  std::printf("OpenMP disabled: both columns run serially\n");
#endif
  std::printf("%-22s %11s %11s %9s   %s\n", "sweep", "serial", "parallel",
              "speedup", "reduction");

  const std::uint64_t seed = 2024;
  bool all_match = true;

  {
    double ts = 0.0, tp = 0.0;
    auto s = timed([&] { return predfb::linear_bound_sweep_serial(linear_cases, 1.0, seed); }, &ts);
    auto p = timed([&] { return predfb::linear_bound_sweep(linear_cases, 1.0, seed); }, &tp);
    bool match = s.min_slack == p.min_slack && s.rows.size() == p.rows.size();
    for (std::size_t i = 0; match && i < s.rows.size(); ++i)
      match = s.rows[i].error == p.rows[i].error && s.rows[i].bound == p.rows[i].bound;
    print_row("linear bounds", ts, tp, match);
    all_match = all_match && match;
  }

  {
    predfb::NonlinearSystem sys = predfb::cubic_system();
    predfb::CompletenessCertificate cert = predfb::cubic_completeness(0.5);
    predfb::BoundsPack pack = predfb::build_bounds_pack(sys, cert, 0.5);
    predfb::AccuracyFn acc = predfb::practical_accuracy(pack, 20.0, 1e4);
    double ts = 0.0, tp = 0.0;
    auto s = timed([&] {
      return predfb::nonlinear_bound_sweep_serial(sys, pack, acc, nonlinear_cases,
                                                  seed, 1e6);
    }, &ts);
    auto p = timed([&] {
      return predfb::nonlinear_bound_sweep(sys, pack, acc, nonlinear_cases, seed,
                                           1e6);
    }, &tp);
    bool match = s.min_energy_slack == p.min_energy_slack &&
                 s.min_error_slack == p.min_error_slack &&
                 s.min_apriori_margin == p.min_apriori_margin &&
                 s.rows.size() == p.rows.size();
    for (std::size_t i = 0; match && i < s.rows.size(); ++i)
      match = s.rows[i].error == p.rows[i].error && s.rows[i].steps == p.rows[i].steps;
    print_row("nonlinear bounds", ts, tp, match);
    all_match = all_match && match;
  }

  {
    predfb::LinearSystem lin = predfb::benchmark_linear(1.93);
    predfb::SimOptions opts;
    opts.steps_per_unit = 200;
    predfb::Vec x0(1);
    x0(0) = 1.0;
    double ts = 0.0, tp = 0.0;
    auto s = timed([&] {
      return predfb::schedule_decay_sweep_serial(lin, 65, 1.0, 30.0, opts, x0,
                                                 decay_random, seed);
    }, &ts);
    auto p = timed([&] {
      return predfb::schedule_decay_sweep(lin, 65, 1.0, 30.0, opts, x0,
                                          decay_random, seed);
    }, &tp);
    bool match = s.min_rate == p.min_rate &&
                 s.max_envelope_excess == p.max_envelope_excess &&
                 s.rows.size() == p.rows.size();
    for (std::size_t i = 0; match && i < s.rows.size(); ++i)
      match = s.rows[i].rate == p.rows[i].rate;
    print_row("schedule decay", ts, tp, match);
    all_match = all_match && match;
  }

  return all_match ? 0 : 1;
}
