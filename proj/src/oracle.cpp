#include "predfb/oracle.hpp"

#include <cmath>

namespace predfb {

namespace {

// One classical RK4 step for dx/dt = f(x, u(t)).
Vec rk4_step(const VectorField& f, const InputSignal& u, const Vec& x, double t,
             double h) {
  Vec u0 = u(t);
  Vec um = u(t + 0.5 * h);
  Vec u1 = u(t + h);
  Vec k1 = f(x, u0);
  Vec k2 = f(x + 0.5 * h * k1, um);
  Vec k3 = f(x + 0.5 * h * k2, um);
  Vec k4 = f(x + h * k3, u1);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec rk4_run(const VectorField& f, const InputSignal& u, const Vec& x0, double t0,
            double t1, long long n_steps) {
  Vec x = x0;
  double h = (t1 - t0) / static_cast<double>(n_steps);
  for (long long i = 0; i < n_steps; ++i) {
    double t = t0 + static_cast<double>(i) * h;
    x = rk4_step(f, u, x, t, h);
  }
  return x;
}

}  // namespace

OracleResult rk4_reference(const VectorField& f, const InputSignal& u,
                           const Vec& x0, double t0, double t1, long long n_steps) {
  if (n_steps <= 0) throw ValidationError("rk4_reference: n_steps must be positive");
  if (!(t1 >= t0)) throw ValidationError("rk4_reference: reversed interval");
  OracleResult res;
  Vec coarse = rk4_run(f, u, x0, t0, t1, n_steps);
  Vec fine = rk4_run(f, u, x0, t0, t1, 2 * n_steps);
  res.state = fine;
  res.error_estimate = (coarse - fine).norm();
  res.steps = 2 * n_steps;
  return res;
}

Mat rk4_on_grid(const VectorField& f, const InputSignal& u, const Vec& x0,
                double t0, double h, long long n_cells, int substeps) {
  if (n_cells < 0 || substeps < 1) throw ValidationError("rk4_on_grid: bad grid");
  Mat states(x0.size(), n_cells + 1);
  states.col(0) = x0;
  Vec x = x0;
  for (long long i = 0; i < n_cells; ++i) {
    double a = t0 + static_cast<double>(i) * h;
    double hh = h / substeps;
    for (int j = 0; j < substeps; ++j) x = rk4_step(f, u, x, a + j * hh, hh);
    states.col(i + 1) = x;
  }
  return states;
}

GridReference reference_on_grid(const VectorField& f, const InputSignal& u,
                                const Vec& x0, double t0, double h,
                                long long n_cells, int substeps) {
  GridReference res;
  Mat coarse = rk4_on_grid(f, u, x0, t0, h, n_cells, substeps);
  res.states = rk4_on_grid(f, u, x0, t0, h, n_cells, 2 * substeps);
  double worst = 0.0;
  for (long long i = 0; i <= n_cells; ++i)
    worst = std::max(worst, (coarse.col(i) - res.states.col(i)).norm());
  res.error_estimate = worst;
  res.rhs_evals = 4LL * n_cells * (substeps + 2 * substeps);
  return res;
}

}  // namespace predfb
