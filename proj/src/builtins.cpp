#include "predfb/builtins.hpp"

#include <cmath>
#include <limits>

#include "predfb/math_util.hpp"

namespace predfb {

NonlinearSystem cubic_system() {
  NonlinearSystem sys;
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.dynamics = [](const Vec& x, const Vec& u) -> Vec {
    Vec out(1);
    out[0] = x[0] - x[0] * x[0] * x[0] + u[0];
    return out;
  };
  sys.feedback = [](const Vec& x) -> Vec {
    Vec out(1);
    out[0] = -2.0 * x[0];
    return out;
  };
  // |f(x,u)-f(y,u)| = |x-y| |1 - (x^2+xy+y^2)| <= (1 + (|x|+|y|)^2) |x-y| and
  // |x - x^3 + u| <= (|x|+|u|)(1 + (|x|+|u|)^2), so 1 + s^2 works for both.
  sys.growth = [](double s) { return 1.0 + s * s; };
  return sys;
}

CompletenessCertificate cubic_completeness(double horizon, double sample_period) {
  CompletenessCertificate cert;
  cert.energy = [](const Vec& x) { return 1.0 + x[0] * x[0]; };
  cert.energy_grad = [](const Vec& x) -> Vec {
    Vec g(1);
    g[0] = 2.0 * x[0];
    return g;
  };
  cert.hessian_env = [](double) { return 2.0; };
  // W' = 2x(x - x^3 + u) <= (1+x^2)/2 + 2u^2: the gap (2x^2-1/2-x^2/2) - 2x^4
  // + 2xu - 2u^2 is -(u - x/2)^2 - (x^2 - 1/2)^2 / 2 <= 0, tight at x^2 = 1/2.
  cert.energy_rate = 0.5;
  cert.input_gain = [](double s) { return 2.0 * s * s; };
  cert.sublevel_radius = [](double level) { return std::sqrt(std::max(0.0, level - 1.0)); };
  cert.energy_env = [](double s) { return 1.0 + s * s; };
  // (x^2)' <= 2x^2 + 2|x||u| gives |x|' <= |x| + |u|, so |x(t)| stays below
  // e^t (|x(0)| + sup|u|); the reach envelopes are exactly linear.
  double gh = std::exp(horizon);
  cert.reach_horizon = KFn("reach_horizon", [gh](double s) { return gh * s; });
  double gr = sample_period > 0.0 ? std::exp(sample_period) : gh;
  cert.reach_sample = KFn("reach_sample", [gr](double s) { return gr * s; });
  cert.reach_slope = gh;
  return cert;
}

FeedbackCertificate cubic_feedback(double sample_period) {
  FeedbackCertificate fb;
  fb.lyapunov = [](const Vec& x) { return x[0] * x[0]; };
  fb.lyapunov_grad = [](const Vec& x) -> Vec {
    Vec g(1);
    g[0] = 2.0 * x[0];
    return g;
  };
  // Exact closed loop x' = -x - x^3 gives V' = -2x^2 - 2x^4 <= -2V.
  fb.decay = KFn("decay", [](double v) { return 2.0 * v; });
  fb.lower = KFn("lower", [](double s) { return s * s; });
  fb.upper = KFn("upper", [](double s) { return s * s; });
  fb.grad_bound = KFn("grad_bound", [](double s) { return 2.0 * s; });
  fb.feedback_bound = KFn("feedback_bound", [](double s) { return 2.0 * s; });
  // f(x,k(z)) - f(x,k(x)) = -2(z - x): the mismatch gain is exactly 2.
  fb.mismatch = [](double) { return 2.0; };
  fb.quad_radius = 1.0;
  fb.quad_factor = 1.0;
  fb.quad_lower = 1.0;
  fb.quad_upper = 1.0;
  fb.grad_slope = 2.0;
  fb.feedback_slope = 2.0;
  fb.local_decay = 2.0;
  // The sampled certificate is period-independent; the argument is kept so
  // call sites state which loop they certify.
  (void)sample_period;
  return fb;
}

LinearSystem benchmark_linear(double p) {
  LinearSystem sys;
  sys.A = Mat(1, 1);
  sys.B = Mat(1, 1);
  sys.K = Mat(1, 1);
  sys.A << 1.0;
  sys.B << 1.0;
  sys.K << -p;
  sys.delay = 1.0;
  return sys;
}

AccuracyFn practical_accuracy(const BoundsPack& pack, double scale,
                              double grid_budget) {
  if (!(scale > 0.0) || !(grid_budget >= 1.0))
    throw ValidationError("practical_accuracy: need scale > 0 and grid_budget >= 1");
  ScalarFn a_rate = pack.error_growth_rate;
  ScalarFn b_drive = pack.error_drive;
  double tau = pack.horizon;
  ScalarFn value = [scale, grid_budget, a_rate, b_drive, tau](double s) {
    if (s <= 0.0) return 0.0;
    double a = a_rate(s);
    double floor_bound =
        tau * b_drive(s) * std::expm1(tau * a) / (2.0 * grid_budget * a);
    return std::max(scale * s, floor_bound) * (1.0 + 1e-9);
  };
  ScalarFn log_value = [scale, grid_budget, a_rate, b_drive, tau](double s) {
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    double a = a_rate(s);
    double log_floor = std::log(tau) + std::log(b_drive(s)) + log_expm1(tau * a) -
                       std::log(2.0 * grid_budget * a);
    return std::max(std::log(scale * s), log_floor) + std::log1p(1e-9);
  };
  return AccuracyFn{value, log_value};
}

}  // namespace predfb
