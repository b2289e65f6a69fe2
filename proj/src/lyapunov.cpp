#include "predfb/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace predfb {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

Vec sample_ball(std::mt19937_64& rng, int n, double radius) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = radius * unit(rng);
  return v;
}

}  // namespace

BoundsPack build_bounds_pack(const NonlinearSystem& sys,
                             const CompletenessCertificate& cert, double horizon) {
  validate_system(sys);
  require(horizon > 0.0, "build_bounds_pack: horizon must be positive");
  require(cert.energy_rate > 0.0, "build_bounds_pack: energy_rate must be positive");
  require(static_cast<bool>(cert.energy) && static_cast<bool>(cert.input_gain) &&
              static_cast<bool>(cert.sublevel_radius) && static_cast<bool>(cert.energy_env) &&
              static_cast<bool>(cert.hessian_env),
          "build_bounds_pack: certificate incomplete");

  BoundsPack pack;
  pack.horizon = horizon;
  pack.energy_rate = cert.energy_rate;
  pack.growth = sys.growth;
  pack.cert = cert;

  const double c = cert.energy_rate;
  const double grow = std::exp(2.0 * c * horizon);
  ScalarFn energy_env = cert.energy_env;
  ScalarFn input_gain = cert.input_gain;
  ScalarFn sublevel = cert.sublevel_radius;
  pack.state_bound = [grow, c, energy_env, input_gain, sublevel](double s) {
    double level = grow * energy_env(s) + (grow - 1.0) / (2.0 * c) * input_gain(s);
    return 1.0 + sublevel(level);
  };

  ScalarFn growth = sys.growth;
  ScalarFn q = pack.state_bound;
  KFn reach = cert.reach_horizon;
  pack.error_growth_rate = [growth, q, reach](double s) {
    return growth(q(s) + reach(s) + s);
  };
  ScalarFn a_rate = pack.error_growth_rate;
  pack.error_drive = [growth, reach, a_rate](double s) {
    double span = reach(s) + s;
    return a_rate(s) * span * growth(span);
  };

  // The curvature term sees every point the predictor's chords can visit,
  // which inflates the ball by one horizon of growth.
  ScalarFn hess = cert.hessian_env;
  pack.step_restriction = [growth, hess, horizon](double s) {
    double l = growth(s);
    return s * s * l * l * hess(s * (1.0 + horizon * l));
  };
  return pack;
}

DerivedDesign derive_design(const NonlinearSystem& sys,
                            const CompletenessCertificate& cert,
                            const FeedbackCertificate& fb, const BoundsPack& pack,
                            double sample_period) {
  require(sample_period > 0.0, "derive_design: sample_period must be positive");
  require(pack.horizon > 0.0, "derive_design: bounds pack missing a horizon");
  const double capture_radius = fb.quad_radius;
  require(capture_radius > 0.0, "derive_design: quadratic regime radius must be positive");
  require(fb.quad_lower > 0.0 && fb.quad_upper >= fb.quad_lower,
          "derive_design: quadratic envelope constants invalid");
  require(fb.local_decay > 0.0 && fb.grad_slope > 0.0 && fb.feedback_slope > 0.0,
          "derive_design: local constants must be positive");

  const KFn& a1 = fb.lower;
  const KFn& a2 = fb.upper;
  const KFn& a3 = fb.grad_bound;
  const KFn& a4 = fb.feedback_bound;
  DerivedDesign d;

  // Largest capture level whose doubled sublevel set still fits inside the
  // quadratic regime; the map is increasing in the level, so bisect on it.
  auto blowup = [&](double delta) { return a1.inverse(a2(2.0 * a1.inverse(delta))); };
  double delta_cap = a1(capture_radius);
  double delta;
  if (blowup(delta_cap) <= capture_radius) {
    delta = delta_cap;
  } else {
    delta = solve_increasing(blowup, capture_radius, 0.0, delta_cap,
                             "capture level selection");
  }
  d.capture_level = delta;
  d.residual_level = std::min(a1.inverse(delta), fb.decay(0.5 * delta) / 2.0);

  double inner_radius = a1.inverse(delta);
  double outer_radius = blowup(delta);
  double span_l = (1.0 + fb.feedback_slope) * outer_radius + inner_radius;
  d.local_lipschitz = sys.growth(span_l);
  d.local_mismatch_gain = fb.grad_slope * fb.mismatch(outer_radius + inner_radius) *
                          std::exp(sample_period * d.local_lipschitz);

  const double k1 = fb.quad_lower, k2 = fb.quad_upper;
  const double k4 = fb.feedback_slope, mu = fb.local_decay;
  const double phi = d.local_mismatch_gain;
  double slope_a = (1.0 / k4) * std::sqrt(k1 / k2);
  double slope_b = mu * k1 * std::sqrt(k1) /
                   (std::sqrt(2.0) * k2 * phi * (std::sqrt(k1) + k4 * std::sqrt(k2)) +
                    mu * k1 * k4 * std::sqrt(k2));
  d.accuracy_slope = 0.9 * std::min(slope_a, slope_b);

  KFn reach_sample = cert.reach_sample;
  ScalarFn growth = sys.growth;
  ScalarFn mismatch = fb.mismatch;
  double r = sample_period;
  d.disturbance_gain = [a3, mismatch, reach_sample, growth, r](double s) {
    double y = reach_sample(s) + s;
    return a3(y) * mismatch(y) * std::exp(r * growth(y));
  };
  d.log_disturbance_gain = [a3, mismatch, reach_sample, growth, r](double s) {
    double y = reach_sample(s) + s;
    return std::log(a3(y)) + std::log(mismatch(y)) + r * growth(y);
  };

  d.controller_span = [a1, a2, a4](double s) {
    double v = a1.inverse(a2(s));
    return a4(v) + v;
  };

  ScalarFn state_bound = pack.state_bound;
  KFn reach_horizon = cert.reach_horizon;
  ScalarFn log_dgain = d.log_disturbance_gain;
  ScalarFn dgain = d.disturbance_gain;
  ScalarFn span = d.controller_span;
  double gamma = d.residual_level;
  double slope = d.accuracy_slope;

  auto third_branch = [a1, a2, a4](double s) {
    return 0.5 * a2.inverse(a1(a4.inverse(0.5 * s)));
  };
  d.accuracy.value = [gamma, slope, dgain, span, state_bound, reach_horizon,
                      third_branch](double s) {
    if (s <= 0.0) return 0.0;
    double y = reach_horizon(s) + span(state_bound(s));
    double b1 = gamma / std::max(1.0, dgain(y));
    return std::min({b1, slope * s, third_branch(s)});
  };
  d.accuracy.log_value = [gamma, slope, log_dgain, span, state_bound, reach_horizon,
                          third_branch](double s) {
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    double y = reach_horizon(s) + span(state_bound(s));
    double lb1 = std::log(gamma) - std::max(0.0, log_dgain(y));
    double lb2 = std::log(slope) + std::log(s);
    double lb3 = std::log(third_branch(s));
    return std::min({lb1, lb2, lb3});
  };
  return d;
}

void check_completeness_certificate(const NonlinearSystem& sys,
                                    const CompletenessCertificate& cert,
                                    double radius, int n_samples,
                                    std::uint64_t seed) {
  validate_system(sys);
  require(radius > 0.0 && n_samples > 0, "check_completeness_certificate: bad arguments");
  require(cert.energy_rate > 0.0, "check_completeness_certificate: energy_rate must be positive");
  require(cert.reach_slope >= 1.0, "check_completeness_certificate: reach slope below 1");
  const double rel = 1e-9;
  std::mt19937_64 rng(splitmix64(seed, 0));
  for (int i = 0; i < n_samples; ++i) {
    Vec x = sample_ball(rng, sys.state_dim, radius);
    Vec y = sample_ball(rng, sys.state_dim, radius);
    Vec u = sample_ball(rng, sys.input_dim, radius);
    double w = cert.energy(x);
    if (!(w >= 1.0 - rel))
      throw ValidationError("completeness: energy below 1 at |x|=" + fmt_g17(x.norm()));
    double drift = cert.energy_grad(x).dot(sys.dynamics(x, u));
    double budget = cert.energy_rate * w + cert.input_gain(u.norm());
    if (drift > budget * (1.0 + rel) + 1e-12)
      throw ValidationError("completeness: energy drift " + fmt_g17(drift) +
                            " exceeds budget " + fmt_g17(budget));
    if (w > cert.energy_env(x.norm()) * (1.0 + rel) + 1e-12)
      throw ValidationError("completeness: energy exceeds its envelope");
    if (x.norm() > cert.sublevel_radius(w * (1.0 + rel)) + 1e-9)
      throw ValidationError("completeness: sublevel radius too small at level " + fmt_g17(w));
    double dgrad = (cert.energy_grad(x) - cert.energy_grad(y)).norm();
    double dx = (x - y).norm();
    double henv = cert.hessian_env(std::max(x.norm(), y.norm()));
    if (dgrad > henv * dx * (1.0 + rel) + 1e-12)
      throw ValidationError("completeness: gradient increment exceeds hessian envelope");
  }
  // Reach envelope: exactly linear with the declared slope on [0, 1], and
  // never below the identity (the trajectory starts at |x(0)|).
  for (int i = 1; i <= 50; ++i) {
    double s = static_cast<double>(i) / 50.0;
    double v = cert.reach_horizon(s);
    if (std::abs(v - cert.reach_slope * s) > rel * cert.reach_slope * s)
      throw ValidationError("completeness: reach envelope is not reach_slope * s at s=" +
                            fmt_g17(s));
    double sr = cert.reach_sample(s);
    if (sr > v * (1.0 + rel) + 1e-12)
      throw ValidationError("completeness: sample-period reach exceeds the horizon reach");
  }
  for (int i = 1; i <= 50; ++i) {
    double s = radius * i / 50.0;
    if (cert.reach_horizon(s) < s * (1.0 - rel) - 1e-12)
      throw ValidationError("completeness: reach envelope drops below the identity");
  }
}

void check_feedback_certificate(const NonlinearSystem& sys,
                                const FeedbackCertificate& fb, double radius,
                                int n_samples, std::uint64_t seed) {
  validate_system(sys);
  require(radius > 0.0 && n_samples > 0, "check_feedback_certificate: bad arguments");
  require(fb.quad_radius > 0.0 && fb.quad_factor > 0.0,
          "check_feedback_certificate: quadratic regime constants must be positive");
  const double rel = 1e-9;
  std::mt19937_64 rng(splitmix64(seed, 1));
  for (int i = 0; i < n_samples; ++i) {
    Vec x = sample_ball(rng, sys.state_dim, radius);
    Vec z = sample_ball(rng, sys.state_dim, radius);
    double v = fb.lyapunov(x);
    double nx = x.norm();
    if (v < fb.lower(nx) * (1.0 - rel) - 1e-12 || v > fb.upper(nx) * (1.0 + rel) + 1e-12)
      throw ValidationError("feedback: Lyapunov value escapes its class-K envelope");
    double vdot = fb.lyapunov_grad(x).dot(sys.dynamics(x, sys.feedback(x)));
    if (vdot > -fb.decay(v) * (1.0 - rel) + 1e-12)
      throw ValidationError("feedback: decay inequality fails, derivative " + fmt_g17(vdot));
    if (fb.lyapunov_grad(x).norm() > fb.grad_bound(nx) * (1.0 + rel) + 1e-12)
      throw ValidationError("feedback: gradient exceeds its envelope");
    if (sys.feedback(x).norm() > fb.feedback_bound(nx) * (1.0 + rel) + 1e-12)
      throw ValidationError("feedback: feedback magnitude exceeds its envelope");
    double dzx = (z - x).norm();
    if (dzx >= 1e-14) {
      double f_mix = (sys.dynamics(x, sys.feedback(z)) -
                      sys.dynamics(x, sys.feedback(x))).norm();
      if (f_mix > fb.mismatch(nx + z.norm()) * dzx * (1.0 + rel) + 1e-12)
        throw ValidationError("feedback: mismatch increment envelope fails at scale " +
                              fmt_g17(nx + z.norm()));
    }
    if (nx <= fb.quad_radius) {
      if (v < nx * nx * (1.0 - rel) - 1e-12 ||
          v > fb.quad_factor * nx * nx * (1.0 + rel) + 1e-12)
        throw ValidationError("feedback: quadratic envelope fails near the origin");
      if (fb.lyapunov_grad(x).norm() > 2.0 * fb.quad_factor * nx * (1.0 + rel) + 1e-12)
        throw ValidationError("feedback: quadratic gradient bound fails");
      if (vdot > -fb.local_decay * nx * nx * (1.0 - rel) + 1e-12)
        throw ValidationError("feedback: local decay rate fails");
    }
  }
  // Mismatch gain must be a usable envelope scale: nondecreasing and >= 1.
  double prev_m = 0.0;
  for (int i = 0; i <= 40; ++i) {
    double s = 2.0 * radius * i / 40.0;
    double m = fb.mismatch(s);
    if (!(m >= 1.0 - rel) || m < prev_m - rel * std::max(1.0, prev_m))
      throw ValidationError("feedback: mismatch gain must be nondecreasing and >= 1");
    prev_m = m;
  }
  // Class-K envelopes match their declared leading terms on the quadratic ball.
  for (int i = 1; i <= 40; ++i) {
    double s = fb.quad_radius * i / 40.0;
    auto near = [rel](double got, double want) {
      return std::abs(got - want) <= rel * std::max(1.0, std::abs(want));
    };
    if (!near(fb.lower(s), fb.quad_lower * s * s) ||
        !near(fb.upper(s), fb.quad_upper * s * s))
      throw ValidationError("feedback: value envelopes differ from their quadratic "
                            "leading terms on the quadratic ball");
    if (!near(fb.grad_bound(s), fb.grad_slope * s) ||
        !near(fb.feedback_bound(s), fb.feedback_slope * s))
      throw ValidationError("feedback: slope envelopes differ from their linear "
                            "leading terms on the quadratic ball");
  }
}

}  // namespace predfb
