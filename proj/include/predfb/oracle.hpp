#pragma once

#include "predfb/input_history.hpp"
#include "predfb/system.hpp"
#include "predfb/types.hpp"

namespace predfb {

// High-order reference solution with a step-halving error estimate.
struct OracleResult {
  Vec state;              // terminal state of the fine (2x steps) run
  double error_estimate;  // |coarse - fine|, a proxy for the fine run's error
  long long steps;        // steps taken by the fine run
};

// Integrate dx/dt = f(x, u(t)) from t0 to t1 with classical fourth-order
// Runge-Kutta, once with n_steps and once with 2*n_steps.
OracleResult rk4_reference(const VectorField& f, const InputSignal& u,
                           const Vec& x0, double t0, double t1, long long n_steps);

// Reference states on the uniform grid t0 + i*h, i = 0..n_cells, computed
// with `substeps` RK4 stages per cell and re-run at doubled resolution.
struct GridReference {
  Mat states;             // n x (n_cells + 1), fine run
  double error_estimate;  // max over grid points of |coarse - fine|
  long long rhs_evals;
};
GridReference reference_on_grid(const VectorField& f, const InputSignal& u,
                                const Vec& x0, double t0, double h,
                                long long n_cells, int substeps);

// Single RK4 trajectory without refinement; states on the same grid.
Mat rk4_on_grid(const VectorField& f, const InputSignal& u, const Vec& x0,
                double t0, double h, long long n_cells, int substeps);

}  // namespace predfb
