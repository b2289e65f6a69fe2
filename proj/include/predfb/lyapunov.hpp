#pragma once

#include "predfb/math_util.hpp"
#include "predfb/system.hpp"
#include "predfb/types.hpp"

namespace predfb {

// Forward-completeness certificate: an energy function W >= 1 whose derivative
// along open-loop trajectories satisfies
//   grad W(x) . f(x, u) <= energy_rate * W(x) + input_gain(|u|),
// together with envelopes that turn W-levels back into state-norm bounds.
// Downstream bounds spend the doubled rate 2*energy_rate; the extra factor
// absorbs the second-order remainder of the discrete energy update.
struct CompletenessCertificate {
  ScalarField energy;          // W(x) >= 1
  StateMap energy_grad;        // grad W
  ScalarFn hessian_env;        // bound on |grad^2 W| over the ball of radius s
  double energy_rate = 0.0;    // c > 0
  ScalarFn input_gain;         // nondecreasing, 0 at 0
  ScalarFn sublevel_radius;    // radius of { W <= level } as a function of level
  ScalarFn energy_env;         // max of W over the ball of radius s
  KFn reach_horizon;           // bound on |x(t)| for t <= horizon from |x(0)|+sup|u|
  KFn reach_sample;            // same bound over one sampling period
  double reach_slope = 1.0;    // reach_horizon(s) = reach_slope * s on [0, 1]
};

// Feedback certificate: a Lyapunov function V for the exact closed loop
// x' = f(x, k(x)), with global class-K envelopes and a quadratic regime
// near the origin. On the quadratic ball |x| <= quad_radius:
//   |x|^2 <= V(x) <= quad_factor * |x|^2
//   |grad V(x)| <= 2 * quad_factor * |x|
//   grad V(x) . f(x, k(x)) <= -local_decay * |x|^2
// and the class-K envelopes are exactly their leading terms:
//   lower(s) = quad_lower * s^2, upper(s) = quad_upper * s^2,
//   grad_bound(s) = grad_slope * s, feedback_bound(s) = feedback_slope * s.
struct FeedbackCertificate {
  ScalarField lyapunov;        // V
  StateMap lyapunov_grad;      // grad V
  KFn decay;                   // V' <= -decay(V) under exact feedback
  KFn lower, upper;            // lower(|x|) <= V(x) <= upper(|x|)
  KFn grad_bound;              // |grad V(x)| <= grad_bound(|x|)
  KFn feedback_bound;          // |k(x)| <= feedback_bound(|x|)
  ScalarFn mismatch;           // |f(x,k(z)) - f(x,k(x))| <= mismatch(|x|+|z|)*|z-x|
  double quad_radius = 0.0;    // radius of the quadratic regime
  double quad_factor = 0.0;    // two-sided quadratic envelope constant for V
  double quad_lower = 0.0;     // lower(s)          = quad_lower * s^2     on [0, quad_radius]
  double quad_upper = 0.0;     // upper(s)          = quad_upper * s^2     on [0, quad_radius]
  double grad_slope = 0.0;     // grad_bound(s)     = grad_slope * s       on [0, quad_radius]
  double feedback_slope = 0.0; // feedback_bound(s) = feedback_slope * s   on [0, quad_radius]
  double local_decay = 0.0;    // V' <= -local_decay * |x|^2 on the quadratic ball
};

// Prediction-horizon bounds derived from a completeness certificate:
//   state_bound(s)       radius containing every prediction iterate
//   error_growth_rate(s) one-step error amplification exponent
//   error_drive(s)       magnitude of the per-step error source
//   step_restriction(s)  curvature term limiting the usable step size
// with s = |x(t)| + sup of |u| over the delay window.
struct BoundsPack {
  double horizon = 0.0;       // prediction horizon (the input delay)
  double energy_rate = 0.0;   // copy of the certificate rate
  ScalarFn growth;            // copy of the system growth envelope
  CompletenessCertificate cert;
  ScalarFn step_restriction;
  ScalarFn state_bound;
  ScalarFn error_growth_rate;
  ScalarFn error_drive;
};

BoundsPack build_bounds_pack(const NonlinearSystem& sys,
                             const CompletenessCertificate& cert, double horizon);

// Prediction accuracy demand: value(s) is the admissible prediction error at
// size s; log_value(s) = log(value(s)) stays representable when value
// underflows a double.
struct AccuracyFn {
  ScalarFn value;
  ScalarFn log_value;
};

// Accuracy requirement derived from the feedback certificate so that the
// sampled predictor loop provably converges to the residual set. Constants
// are resolved at construction; the accuracy curve itself is exposed both
// directly and in log space because the disturbance gain grows fast enough
// to underflow doubles at moderate state norms.
struct DerivedDesign {
  ScalarFn disturbance_gain;     // amplification of prediction errors
  ScalarFn log_disturbance_gain;
  ScalarFn controller_span;      // bound on |z| the controller can reach from level s
  double capture_level = 0.0;    // Lyapunov level captured by the design
  double residual_level = 0.0;   // guaranteed residual Lyapunov level
  double local_lipschitz = 0.0;  // growth envelope frozen at the capture scale
  double local_mismatch_gain = 0.0;
  double accuracy_slope = 0.0;   // small-signal slope of the accuracy curve
  AccuracyFn accuracy;
};

// Resolve the accuracy design for sampling period `sample_period`; the
// capture ball is the certificate's quadratic regime and the prediction-side
// bounds come from `pack` (built for the same system and delay).
DerivedDesign derive_design(const NonlinearSystem& sys,
                            const CompletenessCertificate& cert,
                            const FeedbackCertificate& fb, const BoundsPack& pack,
                            double sample_period);

// Sampled validators; throw ValidationError with the failing inequality when
// a certificate does not hold on the sampled ball.
void check_completeness_certificate(const NonlinearSystem& sys,
                                    const CompletenessCertificate& cert,
                                    double radius, int n_samples,
                                    std::uint64_t seed);
void check_feedback_certificate(const NonlinearSystem& sys,
                                const FeedbackCertificate& fb, double radius,
                                int n_samples, std::uint64_t seed);

}  // namespace predfb
