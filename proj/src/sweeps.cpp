#include "predfb/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "predfb/linear.hpp"
#include "predfb/math_util.hpp"
#include "predfb/oracle.hpp"

// Every sweep fills one result slot per case and then reduces the slots in
// index order on a single thread, so the parallel build and the serial twin
// produce bit-identical results.

namespace predfb {
namespace {

// Piecewise-linear input on [0, window] with values in [-1, 1] scaled by
// `amplitude`; 16 segments, knots drawn from `rng`.
double fill_input(InputHistory* hist, std::mt19937_64* rng, double window,
                  double amplitude) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n_knots = 17;
  double sup = 0.0;
  for (int j = 0; j < n_knots; ++j) {
    double t = window * static_cast<double>(j) / (n_knots - 1.0);
    Vec u(1);
    u(0) = amplitude * unit(*rng);
    hist->record(t, u);
    sup = std::max(sup, std::abs(u(0)));
  }
  return sup;
}

LinearBoundRow linear_bound_case(std::uint64_t idx, double delay,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed, idx));
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> grid_exp(3, 8);  // N in {8, 16, ..., 256}

  LinearBoundRow row;
  row.case_index = idx;
  row.a = coef(rng);
  row.b = coef(rng);
  row.steps = 1LL << grid_exp(rng);
  row.x0 = unit(rng);

  InputHistory hist(1, delay);
  row.input_sup = fill_input(&hist, &rng, delay, 1.0);

  Mat A = Mat::Constant(1, 1, row.a);
  Mat B = Mat::Constant(1, 1, row.b);
  Vec x0v(1);
  x0v(0) = row.x0;
  Vec z = linear_predict(A, B, hist, x0v, delay, delay, row.steps);

  // Reference: y' = a y + b u(s) on [0, delay] from y(0) = x0. 1e5 RK4 steps
  // put every input knot on a step boundary (16 divides 1e5), so the solver
  // never straddles a derivative break.
  double a = row.a, b = row.b;
  VectorField rhs = [a, b](const Vec& y, const Vec& u) -> Vec {
    Vec d(1);
    d(0) = a * y(0) + b * u(0);
    return d;
  };
  InputSignal u_of_t = [&hist](double t) { return hist.value(t); };
  OracleResult ref = rk4_reference(rhs, u_of_t, x0v, 0.0, delay, 100000);

  row.error = (z - ref.state).norm() + ref.error_estimate;
  row.bound = linear_error_bound(std::abs(row.a), std::abs(row.b), delay,
                                 row.steps, std::abs(row.x0), row.input_sup);
  row.slack = row.bound - row.error;
  return row;
}

LinearBoundSweep reduce_linear(std::vector<LinearBoundRow> rows) {
  LinearBoundSweep out;
  out.rows = std::move(rows);
  out.min_slack = std::numeric_limits<double>::infinity();
  out.all_ok = true;
  for (const auto& r : out.rows) {
    if (r.slack < out.min_slack) out.min_slack = r.slack;
    if (r.slack < 0.0) out.all_ok = false;
  }
  return out;
}

NonlinearBoundRow nonlinear_bound_case(const NonlinearSystem& sys,
                                       const BoundsPack& pack,
                                       const AccuracyFn& accuracy,
                                       std::uint64_t idx, std::uint64_t seed,
                                       double n_max) {
  std::mt19937_64 rng(splitmix64(seed, idx));
  std::uniform_real_distribution<double> unit01(0.0, 1.0);

  // |x0| + sup|u| <= 1: draw the total size and its split independently.
  double total = unit01(rng);
  double frac = unit01(rng);
  double x0_mag = total * frac;
  double u_mag = total - x0_mag;
  double x0_sign = unit01(rng) < 0.5 ? -1.0 : 1.0;

  NonlinearBoundRow row;
  row.case_index = idx;
  row.x0 = x0_sign * x0_mag;

  InputHistory hist(1, pack.horizon);
  fill_input(&hist, &rng, pack.horizon, u_mag);

  Vec x0v(1);
  x0v(0) = row.x0;
  EulerRun run = predict_run(sys, pack, accuracy, hist, x0v, pack.horizon, n_max);
  StepBoundReport rep = check_step_bounds(sys, pack, run, hist, 1);

  row.size_measure = run.size_measure;
  row.steps = run.steps;
  row.error = rep.max_error + rep.ref_error_estimate;
  row.apriori_bound = rep.apriori_bound;
  row.min_energy_slack = rep.min_energy_slack;
  row.min_error_slack = rep.min_error_slack;
  row.state_margin = rep.state_bound - rep.max_state_norm;
  row.ok = rep.apriori_ok && rep.state_ok && rep.energy_ok && rep.error_ok;
  return row;
}

NonlinearBoundSweep reduce_nonlinear(std::vector<NonlinearBoundRow> rows) {
  NonlinearBoundSweep out;
  out.rows = std::move(rows);
  const double inf = std::numeric_limits<double>::infinity();
  out.min_energy_slack = inf;
  out.min_error_slack = inf;
  out.min_apriori_margin = inf;
  out.min_state_margin = inf;
  out.all_ok = true;
  for (const auto& r : out.rows) {
    if (r.min_energy_slack < out.min_energy_slack)
      out.min_energy_slack = r.min_energy_slack;
    if (r.min_error_slack < out.min_error_slack)
      out.min_error_slack = r.min_error_slack;
    double margin = r.apriori_bound - r.error;
    if (margin < out.min_apriori_margin) out.min_apriori_margin = margin;
    if (r.state_margin < out.min_state_margin) out.min_state_margin = r.state_margin;
    if (!r.ok) out.all_ok = false;
  }
  return out;
}

ScheduleDecayRow schedule_decay_case(const LinearSystem& sys, long long grid,
                                     double period, double horizon,
                                     const SimOptions& opts, const Vec& x0,
                                     std::uint64_t seed) {
  SamplingSchedule sched =
      seed == 0 ? make_schedule(ScheduleKind::Uniform, period, horizon, 0)
                : make_schedule(ScheduleKind::Random, period, horizon, seed);
  InputSignal u0 = [&sys](double) { return Vec::Zero(sys.B.cols()); };
  Trajectory traj = simulate_linear(sys, sched, x0, u0, opts, grid);
  DecayFit fit = decay_fit(traj, sys.delay);
  ScheduleDecayRow row;
  row.seed = seed;
  row.rate = fit.rate;
  row.envelope_excess = fit.envelope_excess;
  row.final_ratio = fit.final_ratio;
  return row;
}

ScheduleDecaySweep reduce_decay(std::vector<ScheduleDecayRow> rows) {
  ScheduleDecaySweep out;
  out.rows = std::move(rows);
  out.min_rate = std::numeric_limits<double>::infinity();
  out.max_envelope_excess = 0.0;
  out.max_final_ratio = 0.0;
  for (const auto& r : out.rows) {
    if (r.rate < out.min_rate) out.min_rate = r.rate;
    if (r.envelope_excess > out.max_envelope_excess)
      out.max_envelope_excess = r.envelope_excess;
    if (r.final_ratio > out.max_final_ratio) out.max_final_ratio = r.final_ratio;
  }
  return out;
}

}  // namespace

LinearBoundSweep linear_bound_sweep(int n_cases, double delay, std::uint64_t seed) {
  if (n_cases < 1) throw ValidationError("linear_bound_sweep: need n_cases >= 1");
  std::vector<LinearBoundRow> rows(static_cast<std::size_t>(n_cases));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_cases; ++i)
    rows[static_cast<std::size_t>(i)] =
        linear_bound_case(static_cast<std::uint64_t>(i), delay, seed);
  return reduce_linear(std::move(rows));
}

LinearBoundSweep linear_bound_sweep_serial(int n_cases, double delay,
                                           std::uint64_t seed) {
  if (n_cases < 1) throw ValidationError("linear_bound_sweep: need n_cases >= 1");
  std::vector<LinearBoundRow> rows(static_cast<std::size_t>(n_cases));
  for (int i = 0; i < n_cases; ++i)
    rows[static_cast<std::size_t>(i)] =
        linear_bound_case(static_cast<std::uint64_t>(i), delay, seed);
  return reduce_linear(std::move(rows));
}

NonlinearBoundSweep nonlinear_bound_sweep(const NonlinearSystem& sys,
                                          const BoundsPack& pack,
                                          const AccuracyFn& accuracy, int n_cases,
                                          std::uint64_t seed, double n_max) {
  if (n_cases < 1) throw ValidationError("nonlinear_bound_sweep: need n_cases >= 1");
  std::vector<NonlinearBoundRow> rows(static_cast<std::size_t>(n_cases));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_cases; ++i)
    rows[static_cast<std::size_t>(i)] = nonlinear_bound_case(
        sys, pack, accuracy, static_cast<std::uint64_t>(i), seed, n_max);
  return reduce_nonlinear(std::move(rows));
}

NonlinearBoundSweep nonlinear_bound_sweep_serial(const NonlinearSystem& sys,
                                                 const BoundsPack& pack,
                                                 const AccuracyFn& accuracy,
                                                 int n_cases, std::uint64_t seed,
                                                 double n_max) {
  if (n_cases < 1) throw ValidationError("nonlinear_bound_sweep: need n_cases >= 1");
  std::vector<NonlinearBoundRow> rows(static_cast<std::size_t>(n_cases));
  for (int i = 0; i < n_cases; ++i)
    rows[static_cast<std::size_t>(i)] = nonlinear_bound_case(
        sys, pack, accuracy, static_cast<std::uint64_t>(i), seed, n_max);
  return reduce_nonlinear(std::move(rows));
}

ScheduleDecaySweep schedule_decay_sweep(const LinearSystem& sys, long long grid,
                                        double period, double horizon,
                                        const SimOptions& opts, const Vec& x0,
                                        int n_random, std::uint64_t seed) {
  if (n_random < 0) throw ValidationError("schedule_decay_sweep: need n_random >= 0");
  std::vector<ScheduleDecayRow> rows(static_cast<std::size_t>(n_random) + 1);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i <= n_random; ++i) {
    std::uint64_t s = i == 0 ? 0 : seed + static_cast<std::uint64_t>(i);
    rows[static_cast<std::size_t>(i)] =
        schedule_decay_case(sys, grid, period, horizon, opts, x0, s);
  }
  return reduce_decay(std::move(rows));
}

ScheduleDecaySweep schedule_decay_sweep_serial(const LinearSystem& sys,
                                               long long grid, double period,
                                               double horizon,
                                               const SimOptions& opts, const Vec& x0,
                                               int n_random, std::uint64_t seed) {
  if (n_random < 0) throw ValidationError("schedule_decay_sweep: need n_random >= 0");
  std::vector<ScheduleDecayRow> rows(static_cast<std::size_t>(n_random) + 1);
  for (int i = 0; i <= n_random; ++i) {
    std::uint64_t s = i == 0 ? 0 : seed + static_cast<std::uint64_t>(i);
    rows[static_cast<std::size_t>(i)] =
        schedule_decay_case(sys, grid, period, horizon, opts, x0, s);
  }
  return reduce_decay(std::move(rows));
}

}  // namespace predfb
