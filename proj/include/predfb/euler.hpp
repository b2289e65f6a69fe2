#pragma once

#include "predfb/input_history.hpp"
#include "predfb/lyapunov.hpp"
#include "predfb/system.hpp"
#include "predfb/types.hpp"

namespace predfb {

// Forward-Euler prediction grid: states_i approximates the plant state at
// window_start + horizon + i*h, driven by the recorded inputs on
// [window_start, window_start + horizon].
struct EulerRun {
  Mat states;            // n x (steps + 1)
  long long steps = 0;
  double h = 0.0;
  double size_measure = 0.0;  // |x0| + input_sup
  double input_sup = 0.0;     // sup of |u| over the input window
  double window_start = 0.0;
};

// Euler recursion x_{i+1} = x_i + integral of f(x_i, u(.)) over the i-th cell,
// with the input integral evaluated exactly on the piecewise-linear record.
Mat euler_trajectory(const NonlinearSystem& sys, const Vec& x0,
                     const InputHistory& hist, double window_start,
                     double horizon, long long steps);

// Smallest grid size whose certified prediction error meets accuracy(s) and
// whose step size respects the curvature restriction. Throws GridCapError
// (carrying the required count) when the demand exceeds n_max.
long long grid_count(const BoundsPack& pack, const AccuracyFn& accuracy,
                     double x0_norm, double input_sup, double n_max);

struct PredictorOutput {
  Vec z;                       // predicted state one horizon ahead
  long long steps = 0;
  double h = 0.0;
  double size_measure = 0.0;
  double apriori_bound = 0.0;  // certified prediction error bound
  double accuracy_target = 0.0;
};

// Full predictor: size the grid from the certified bounds, run the Euler
// recursion on the recorded inputs ending at time t, return the prediction.
PredictorOutput predict(const NonlinearSystem& sys, const BoundsPack& pack,
                        const AccuracyFn& accuracy, const InputHistory& hist,
                        const Vec& x, double t, double n_max);

// Same, but returning the whole grid for bound verification.
EulerRun predict_run(const NonlinearSystem& sys, const BoundsPack& pack,
                     const AccuracyFn& accuracy, const InputHistory& hist,
                     const Vec& x, double t, double n_max);

// Certified a priori error bound for a run of `steps` cells at size s.
double apriori_error_bound(const BoundsPack& pack, double s, long long steps);

// Walk a prediction grid against a streamed high-order reference and check
// every certified per-step inequality. Slacks are bound minus attained value,
// so nonnegative slack means the bound holds.
struct StepBoundReport {
  double max_error = 0.0;           // max_i |states_i - reference_i|
  double ref_error_estimate = 0.0;  // step-halving estimate for the reference
  double apriori_bound = 0.0;
  double min_energy_slack = 0.0;    // energy envelope along the grid
  double min_error_slack = 0.0;     // per-step accumulated error envelope
  double max_state_norm = 0.0;
  double state_bound = 0.0;
  bool apriori_ok = false;
  bool state_ok = false;
  bool energy_ok = false;
  bool error_ok = false;
};
StepBoundReport check_step_bounds(const NonlinearSystem& sys,
                                  const BoundsPack& pack, const EulerRun& run,
                                  const InputHistory& hist, int ref_substeps);

}  // namespace predfb
