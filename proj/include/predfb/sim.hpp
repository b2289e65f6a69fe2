#pragma once

#include <optional>
#include <vector>

#include "predfb/euler.hpp"
#include "predfb/linear.hpp"
#include "predfb/lyapunov.hpp"
#include "predfb/system.hpp"
#include "predfb/types.hpp"

namespace predfb {

// Controller activation instants. T_0 = 0; gaps are bounded by the period and
// the last instant is within one period of the horizon.
struct SamplingSchedule {
  std::vector<double> times;
  double period = 0.0;   // upper bound on consecutive gaps
  double horizon = 0.0;
};

enum class ScheduleKind { Uniform, Jittered, Random };

// Uniform: T_i = i * period for every multiple inside [0, horizon], horizon
// itself included when the grid lands on it. Jittered: gaps uniform in
// [period/2, period]. Random: gaps uniform in (0, period]. Deterministic in
// `seed`.
SamplingSchedule make_schedule(ScheduleKind kind, double period, double horizon,
                               std::uint64_t seed);

struct SamplePoint {
  double t = 0.0;
  PredictorOutput prediction;
};

// Recorded closed-loop run. Rows of the state/input matrices follow `times`;
// the prelude carries the input prefill on [-delay, 0) so windowed input
// norms are available from the first recorded instant.
struct Trajectory {
  std::vector<double> times;
  Mat x;                 // n x times.size()
  Mat z;                 // n x times.size(), controller state
  Mat u;                 // m x times.size(), applied input
  std::vector<char> is_sample;
  std::vector<long long> grid_used;   // predictor grid at each row's segment
  std::vector<double> prelude_times;  // in [-delay, 0)
  Mat prelude_u;         // m x prelude_times.size()
  std::vector<SamplePoint> samples;
  double delay = 0.0;
};

struct SimOptions {
  int steps_per_unit = 1000;      // RK4 micro-steps per unit time
  double record_dt = 0.0;         // 0: delay/1000, snapped so delay is a multiple
  double n_max = 1e7;
  std::optional<long long> forced_grid;  // bypass grid sizing when set
};

// Hybrid loop for a nonlinear plant: plant x' = f(x, u(t - delay)); at each
// schedule instant the controller state z resets to the certified prediction
// of x one delay ahead; between instants z' = f(z, k(z)) and u = k(z). The
// horizon is the schedule's; the delay is the pack's.
Trajectory simulate_nonlinear(const NonlinearSystem& sys, const BoundsPack& pack,
                              const AccuracyFn& accuracy,
                              const SamplingSchedule& schedule, const Vec& x0,
                              const InputSignal& u_init, const SimOptions& opts);

// Same loop for a linear plant with a fixed predictor grid.
Trajectory simulate_linear(const LinearSystem& sys,
                           const SamplingSchedule& schedule, const Vec& x0,
                           const InputSignal& u_init, const SimOptions& opts,
                           long long grid);

// Decay metric m(t) = |x(t)| + sup of |u| over [t - window, t), computed from
// the recorded rows (prelude included). Rate and prefactor come from least
// squares on log m over the trailing 60% of the run (values below 1e-14
// ignored); the excess is the largest pointwise overshoot of m above the
// fitted exponential anywhere on the grid, and envelope_ok grants it 10%.
struct DecayFit {
  double rate = 0.0;         // fitted decay exponent, positive means decay
  double log_m0 = 0.0;       // fitted log prefactor at t = 0
  double envelope_excess = 0.0;  // max of m/fit - 1 over the whole run
  bool envelope_ok = false;      // envelope_excess <= 0.10
  double final_ratio = 0.0;  // m(end)/m(start)
  std::vector<double> m;     // metric per recorded row
};
// Requires the run to span at least 5 windows; throws ValidationError below.
DecayFit decay_fit(const Trajectory& traj, double window);

// Closed-loop claims along a recorded nonlinear run:
//   (1) the Lyapunov value reaches the ultimate level decay^{-1}(2 gamma) +
//       tol and stays below it;
//   (2) past the first sampling time whose one-delay-later state is inside
//       the capture level, |x| and |u| decay exponentially (positive fitted
//       rates, degenerate-zero signals pass);
//   (3) the decay metric stays finite over the whole run.
struct ClaimReport {
  double ultimate_level = 0.0;
  double reach_time = -1.0;    // first recorded t with V <= ultimate_level
  bool stayed = false;         // V <= ultimate_level at every later recorded t
  double max_after_reach = 0.0;
  bool ultimate_ok = false;

  double capture_time = -1.0;  // first sample T_j with V(x(T_j + delay)) inside
  double state_rate = 0.0;     // fitted decay of log |x| past the capture time
  double input_rate = 0.0;     // fitted decay of log |u| past the capture time
  bool exponential_ok = false;

  double sup_metric = 0.0;     // sup over the run of |x(t)| + windowed input sup
  bool bounded_ok = false;

  bool ok = false;
};
ClaimReport claim_checks(const Trajectory& traj, const DerivedDesign& design,
                         const FeedbackCertificate& fb, double tol = 1e-6);

}  // namespace predfb
