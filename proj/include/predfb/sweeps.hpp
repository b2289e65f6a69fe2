#pragma once

#include <vector>

#include "predfb/euler.hpp"
#include "predfb/sim.hpp"
#include "predfb/system.hpp"

namespace predfb {

// Randomized scalar linear cases: predictor error vs. its certified bound.
struct LinearBoundRow {
  std::uint64_t case_index = 0;
  double a = 0.0, b = 0.0;
  long long steps = 0;
  double x0 = 0.0;
  double input_sup = 0.0;
  double error = 0.0;       // |prediction - reference| + reference estimate
  double bound = 0.0;
  double slack = 0.0;       // bound - error
};
struct LinearBoundSweep {
  std::vector<LinearBoundRow> rows;
  double min_slack = 0.0;
  bool all_ok = false;
};
LinearBoundSweep linear_bound_sweep(int n_cases, double delay, std::uint64_t seed);
LinearBoundSweep linear_bound_sweep_serial(int n_cases, double delay, std::uint64_t seed);

// Randomized nonlinear cases: run the certified predictor and verify every
// per-grid bound against a streamed high-order reference.
struct NonlinearBoundRow {
  std::uint64_t case_index = 0;
  double x0 = 0.0;
  double size_measure = 0.0;
  long long steps = 0;
  double error = 0.0;
  double apriori_bound = 0.0;
  double min_energy_slack = 0.0;
  double min_error_slack = 0.0;
  double state_margin = 0.0;  // state_bound - max |state|
  bool ok = false;
};
struct NonlinearBoundSweep {
  std::vector<NonlinearBoundRow> rows;
  double min_energy_slack = 0.0;
  double min_error_slack = 0.0;
  double min_apriori_margin = 0.0;  // min of bound - error
  double min_state_margin = 0.0;
  bool all_ok = false;
};
NonlinearBoundSweep nonlinear_bound_sweep(const NonlinearSystem& sys,
                                          const BoundsPack& pack,
                                          const AccuracyFn& accuracy,
                                          int n_cases, std::uint64_t seed,
                                          double n_max);
NonlinearBoundSweep nonlinear_bound_sweep_serial(const NonlinearSystem& sys,
                                                 const BoundsPack& pack,
                                                 const AccuracyFn& accuracy,
                                                 int n_cases, std::uint64_t seed,
                                                 double n_max);

// Closed-loop decay metrics across randomized sampling schedules.
struct ScheduleDecayRow {
  std::uint64_t seed = 0;       // 0 marks the uniform schedule
  double rate = 0.0;
  double envelope_excess = 0.0;
  double final_ratio = 0.0;
};
struct ScheduleDecaySweep {
  std::vector<ScheduleDecayRow> rows;
  double min_rate = 0.0;
  double max_envelope_excess = 0.0;
  double max_final_ratio = 0.0;
};
ScheduleDecaySweep schedule_decay_sweep(const LinearSystem& sys, long long grid,
                                        double period, double horizon,
                                        const SimOptions& opts, const Vec& x0,
                                        int n_random, std::uint64_t seed);
ScheduleDecaySweep schedule_decay_sweep_serial(const LinearSystem& sys, long long grid,
                                               double period, double horizon,
                                               const SimOptions& opts, const Vec& x0,
                                               int n_random, std::uint64_t seed);

}  // namespace predfb
