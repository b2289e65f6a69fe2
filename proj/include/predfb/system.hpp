#pragma once

#include "predfb/types.hpp"

namespace predfb {

// Controlled ODE with a stabilizing feedback and a growth envelope for the
// dynamics: a single nondecreasing function growth >= 1 such that
//   |f(x,u) - f(y,u)| <= growth(|x|+|y|+|u|) * |x-y|
//   |f(x,u)|          <= (|x|+|u|) * growth(|x|+|u|)
// for all states and inputs. The feedback is not covered by the envelope.
struct NonlinearSystem {
  int state_dim = 0;
  int input_dim = 0;
  VectorField dynamics;   // f(x, u), f(0, 0) = 0
  StateMap feedback;      // k(x), k(0) = 0
  ScalarFn growth;        // nondecreasing, >= 1
};

// Linear plant dx/dt = A x + B u(t - delay) with feedback gain K.
struct LinearSystem {
  Mat A;
  Mat B;
  Mat K;
  double delay = 0.0;
};

// Evaluate dynamics with dimension checks; throws ValidationError on mismatch.
Vec eval_dynamics(const NonlinearSystem& sys, const Vec& x, const Vec& u);

// Structural sanity checks: positive dimensions, callable fields, f(0,0) = 0,
// k(0) = 0, growth >= 1 and nondecreasing on a sample grid. Throws
// ValidationError with a description of the first failure.
void validate_system(const NonlinearSystem& sys);

// Monte Carlo check of the two envelope inequalities over the ball
// |x|, |y|, |u| <= radius, plus a deterministic prologue covering the origin
// and axis-aligned unit vectors at unit and full radius. Reports the largest
// observed ratio of each left side to its certified right side; both must
// stay <= 1 (tolerance 1e-9) for a valid envelope. Deterministic in `seed`,
// independent of thread count.
struct EnvelopeReport {
  double max_ratio_increment = 0.0;   // |f(x,u)-f(y,u)| vs growth * |x-y|
  double worst_scale_increment = 0.0; // argument passed to growth at the worst pair
  double max_ratio_magnitude = 0.0;   // |f(x,u)| vs (|x|+|u|) * growth
  double worst_scale_magnitude = 0.0;
  bool ok = false;
};
EnvelopeReport check_growth_envelope(const NonlinearSystem& sys, double radius,
                                     int n_samples, std::uint64_t seed);
EnvelopeReport check_growth_envelope_serial(const NonlinearSystem& sys, double radius,
                                            int n_samples, std::uint64_t seed);

// Wrap a linear system as a NonlinearSystem; the growth envelope is the
// constant max(1, |A| + |B|) in spectral norms.
NonlinearSystem linear_as_nonlinear(const LinearSystem& sys);

}  // namespace predfb
