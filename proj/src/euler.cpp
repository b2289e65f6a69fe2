#include "predfb/euler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "predfb/math_util.hpp"
#include "predfb/oracle.hpp"

namespace predfb {

Mat euler_trajectory(const NonlinearSystem& sys, const Vec& x0,
                     const InputHistory& hist, double window_start,
                     double horizon, long long steps) {
  if (steps <= 0) throw ValidationError("euler_trajectory: steps must be positive");
  if (!(horizon > 0.0)) throw ValidationError("euler_trajectory: horizon must be positive");
  if (x0.size() != sys.state_dim)
    throw ValidationError("euler_trajectory: state dimension mismatch");
  double window_end = window_start + horizon;
  // (t - horizon) + horizon can land one ulp past t, so coverage is checked
  // with a relative slack and queries are clamped back into the record.
  const double cover_tol =
      1e-9 * std::max({1.0, std::abs(window_start), std::abs(window_end)});
  if (window_start < hist.start_time() - cover_tol ||
      window_end > hist.end_time() + cover_tol)
    throw ValidationError("euler_trajectory: input record [" +
                          fmt_g17(hist.start_time()) + ", " +
                          fmt_g17(hist.end_time()) +
                          "] does not cover the window [" +
                          fmt_g17(window_start) + ", " + fmt_g17(window_end) +
                          "]");
  auto input_at = [&hist](double t) {
    return hist.value(std::clamp(t, hist.start_time(), hist.end_time()));
  };

  const double h = horizon / static_cast<double>(steps);
  Mat states(sys.state_dim, steps + 1);
  states.col(0) = x0;
  Vec x = x0;

  const auto& samp = hist.samples();
  // First stored sample strictly inside the window; advanced monotonically.
  std::size_t cur = 0;
  while (cur < samp.size() && samp[cur].t <= window_start) ++cur;

  double a = window_start;
  Vec u_a = input_at(a);
  for (long long i = 0; i < steps; ++i) {
    double b = (i == steps - 1) ? window_end
                                : window_start + static_cast<double>(i + 1) * h;
    // Exact piecewise-linear breakpoints keep the input integral's trapezoid
    // rule exact in u; the frozen state x_i makes f affine along each segment
    // of constant u-slope only in u, so segments are split at every sample.
    double seg_a = a;
    Vec f_a = sys.dynamics(x, u_a);
    Vec acc = Vec::Zero(sys.state_dim);
    while (cur < samp.size() && samp[cur].t < b) {
      double seg_b = samp[cur].t;
      if (seg_b > seg_a) {
        const Vec& u_b = samp[cur].u;
        Vec f_b = sys.dynamics(x, u_b);
        acc += (0.5 * (seg_b - seg_a)) * (f_a + f_b);
        seg_a = seg_b;
        f_a.swap(f_b);
        u_a = u_b;
      }
      ++cur;
    }
    Vec u_b = input_at(b);
    Vec f_b = sys.dynamics(x, u_b);
    acc += (0.5 * (b - seg_a)) * (f_a + f_b);
    x += acc;
    if (!x.allFinite())
      throw NumericError("euler_trajectory: non-finite state at step " +
                         std::to_string(i + 1) + " of " + std::to_string(steps));
    states.col(i + 1) = x;
    a = b;
    u_a.swap(u_b);
  }
  return states;
}

long long grid_count(const BoundsPack& pack, const AccuracyFn& accuracy,
                     double x0_norm, double input_sup, double n_max) {
  if (x0_norm < 0.0 || input_sup < 0.0)
    throw ValidationError("grid_count: norms must be nonnegative");
  if (!(n_max >= 1.0)) throw ValidationError("grid_count: n_max must be at least 1");
  const double s = x0_norm + input_sup;
  if (s == 0.0) return 1;

  const double tau = pack.horizon;
  const double c = pack.energy_rate;
  const double a = pack.error_growth_rate(s);
  const double b = pack.error_drive(s);
  if (!(a > 0.0) || !(b > 0.0))
    throw NumericError("grid_count: degenerate growth rate or drive at s=" + fmt_g17(s));
  const double curvature = pack.step_restriction(pack.state_bound(s) + input_sup);
  const double branch2 = curvature / (2.0 * c);

  const double r_direct = accuracy.value(s);
  if (tau * a < 700.0 && r_direct > 1e-300 && std::isfinite(b) &&
      std::isfinite(branch2)) {
    double branch1 = b * std::expm1(tau * a) / (2.0 * r_direct * a);
    double v = tau * std::max(branch1, branch2);
    if (v < n_max) return 1 + static_cast<long long>(std::floor(v));
    throw GridCapError("grid_count: demand " + fmt_g17(1.0 + std::floor(v)) +
                           " cells exceeds cap " + fmt_g17(n_max),
                       1.0 + std::floor(v));
  }

  // Out of double range somewhere; assemble the demand in log space.
  double log_b1 = std::log(b) + log_expm1(tau * a) - std::log(2.0) - std::log(a) -
                  accuracy.log_value(s);
  double log_v = std::log(tau) + std::max(log_b1, std::log(branch2));
  if (log_v < std::log(n_max)) {
    double v = std::exp(log_v);
    if (v < n_max) return 1 + static_cast<long long>(std::floor(v));
  }
  double required =
      log_v > 708.0 ? std::numeric_limits<double>::infinity() : 1.0 + std::floor(std::exp(log_v));
  throw GridCapError("grid_count: demand exp(" + fmt_g17(log_v) +
                         ") cells exceeds cap " + fmt_g17(n_max),
                     required);
}

double apriori_error_bound(const BoundsPack& pack, double s, long long steps) {
  if (s <= 0.0) return 0.0;
  const double a = pack.error_growth_rate(s);
  const double b = pack.error_drive(s);
  return pack.horizon * b * std::expm1(pack.horizon * a) /
         (2.0 * static_cast<double>(steps) * a);
}

EulerRun predict_run(const NonlinearSystem& sys, const BoundsPack& pack,
                     const AccuracyFn& accuracy, const InputHistory& hist,
                     const Vec& x, double t, double n_max) {
  EulerRun run;
  if (std::abs(hist.window() - pack.horizon) > 1e-9 * std::max(1.0, pack.horizon))
    throw ValidationError("predict_run: history window " + fmt_g17(hist.window()) +
                          " does not match prediction horizon " +
                          fmt_g17(pack.horizon));
  run.window_start = t - pack.horizon;
  run.input_sup = hist.sup_norm_window(t);
  double x0n = x.norm();
  run.size_measure = x0n + run.input_sup;
  run.steps = grid_count(pack, accuracy, x0n, run.input_sup, n_max);
  run.h = pack.horizon / static_cast<double>(run.steps);
  run.states = euler_trajectory(sys, x, hist, run.window_start, pack.horizon, run.steps);
  return run;
}

PredictorOutput predict(const NonlinearSystem& sys, const BoundsPack& pack,
                        const AccuracyFn& accuracy, const InputHistory& hist,
                        const Vec& x, double t, double n_max) {
  EulerRun run = predict_run(sys, pack, accuracy, hist, x, t, n_max);
  PredictorOutput out;
  out.z = run.states.col(run.steps);
  out.steps = run.steps;
  out.h = run.h;
  out.size_measure = run.size_measure;
  out.apriori_bound = apriori_error_bound(pack, run.size_measure, run.steps);
  out.accuracy_target = accuracy.value(run.size_measure);
  return out;
}

StepBoundReport check_step_bounds(const NonlinearSystem& sys,
                                  const BoundsPack& pack, const EulerRun& run,
                                  const InputHistory& hist, int ref_substeps) {
  if (ref_substeps < 1) throw ValidationError("check_step_bounds: substeps must be positive");
  StepBoundReport rep;
  const double s = run.size_measure;
  const double h = run.h;
  const double c = pack.energy_rate;
  const long long n = run.steps;
  const double a_rate = s > 0.0 ? pack.error_growth_rate(s) : 0.0;
  const double b_drive = s > 0.0 ? pack.error_drive(s) : 0.0;
  rep.apriori_bound = apriori_error_bound(pack, s, n);
  rep.state_bound = pack.state_bound(s);

  // The per-step guarantees assume the grid satisfies the step restriction
  // h <= 2c / curvature(state_bound + input_sup); reject runs outside it.
  if (s > 0.0) {
    const double curvature = pack.step_restriction(rep.state_bound + run.input_sup);
    if (h * curvature > 2.0 * c * (1.0 + 1e-12))
      throw ValidationError("check_step_bounds: step " + fmt_g17(h) +
                            " exceeds the restriction " + fmt_g17(2.0 * c / curvature));
  }

  InputSignal u = [&hist](double t) {
    return hist.value(std::clamp(t, hist.start_time(), hist.end_time()));
  };
  VectorField f = sys.dynamics;
  Vec ref_c = run.states.col(0);  // coarse reference
  Vec ref_f = ref_c;              // fine reference (doubled substeps)

  const double w0 = pack.cert.energy(run.states.col(0));
  // forcing_i = integral over [t_0, t_i] of e^{2c(t_i - sigma)} gain(|u(sigma)|).
  double forcing = 0.0;
  Vec u_prev = hist.value(run.window_start);
  const auto& samp = hist.samples();
  std::size_t cur = 0;
  while (cur < samp.size() && samp[cur].t <= run.window_start) ++cur;

  double min_energy_slack = std::numeric_limits<double>::infinity();
  double min_error_slack = std::numeric_limits<double>::infinity();
  double max_err = 0.0, max_state = 0.0, max_ref_diff = 0.0;
  const double denom = s > 0.0 ? std::expm1(h * a_rate) : 1.0;

  for (long long i = 0; i <= n; ++i) {
    double t_i = run.window_start + (i == n ? pack.horizon : i * h);
    Vec x_i = run.states.col(i);
    max_state = std::max(max_state, x_i.norm());

    double elapsed = t_i - run.window_start;
    double diff = (ref_c - ref_f).norm();
    max_ref_diff = std::max(max_ref_diff, diff);
    double err = (x_i - ref_f).norm() + diff;
    max_err = std::max(max_err, err);
    double step_bound =
        s > 0.0 ? 0.5 * h * h * b_drive * std::expm1(elapsed * a_rate) / denom : 0.0;
    min_error_slack = std::min(min_error_slack, step_bound - err);

    double energy_budget = std::exp(2.0 * c * elapsed) * w0 + forcing;
    min_energy_slack = std::min(min_energy_slack, energy_budget - pack.cert.energy(x_i));

    if (i == n) break;

    // Advance the weighted forcing integral across the cell. The input is
    // piecewise linear, so per-segment Simpson with the exact midpoint value
    // integrates the weighted gain to negligible quadrature error.
    double b_t = run.window_start + (i + 1 == n ? pack.horizon : (i + 1) * h);
    auto weight = [c, b_t](double sigma) { return std::exp(2.0 * c * (b_t - sigma)); };
    auto gain = [&pack](const Vec& uu) { return pack.cert.input_gain(uu.norm()); };
    auto simpson = [&](double sa, double sb, const Vec& ua, const Vec& ub) {
      Vec um = 0.5 * (ua + ub);
      return (sb - sa) / 6.0 *
             (weight(sa) * gain(ua) + 4.0 * weight(0.5 * (sa + sb)) * gain(um) +
              weight(sb) * gain(ub));
    };
    double seg_a = t_i;
    double cell = 0.0;
    while (cur < samp.size() && samp[cur].t < b_t) {
      double seg_b = samp[cur].t;
      if (seg_b > seg_a) {
        cell += simpson(seg_a, seg_b, u_prev, samp[cur].u);
        seg_a = seg_b;
        u_prev = samp[cur].u;
      }
      ++cur;
    }
    Vec u_end = hist.value(b_t);
    cell += simpson(seg_a, b_t, u_prev, u_end);
    forcing = forcing * std::exp(2.0 * c * (b_t - t_i)) + cell;
    u_prev = u_end;

    double hh = (b_t - t_i) / ref_substeps;
    double hh2 = (b_t - t_i) / (2 * ref_substeps);
    {
      Vec xr = ref_c;
      for (int j = 0; j < ref_substeps; ++j) {
        double tt = t_i + j * hh;
        Vec u0 = u(tt), um = u(tt + 0.5 * hh), u1 = u(tt + hh);
        Vec k1 = f(xr, u0);
        Vec k2 = f(xr + 0.5 * hh * k1, um);
        Vec k3 = f(xr + 0.5 * hh * k2, um);
        Vec k4 = f(xr + hh * k3, u1);
        xr += (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      ref_c = xr;
      xr = ref_f;
      for (int j = 0; j < 2 * ref_substeps; ++j) {
        double tt = t_i + j * hh2;
        Vec u0 = u(tt), um = u(tt + 0.5 * hh2), u1 = u(tt + hh2);
        Vec k1 = f(xr, u0);
        Vec k2 = f(xr + 0.5 * hh2 * k1, um);
        Vec k3 = f(xr + 0.5 * hh2 * k2, um);
        Vec k4 = f(xr + hh2 * k3, u1);
        xr += (hh2 / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      ref_f = xr;
    }
  }

  rep.max_error = max_err;
  rep.ref_error_estimate = max_ref_diff;
  rep.min_energy_slack = min_energy_slack;
  rep.min_error_slack = min_error_slack;
  rep.max_state_norm = max_state;
  rep.apriori_ok = max_err <= rep.apriori_bound || (s == 0.0 && max_err == 0.0);
  rep.state_ok = max_state <= rep.state_bound;
  rep.energy_ok = min_energy_slack >= 0.0;
  rep.error_ok = min_error_slack >= 0.0;
  return rep;
}

}  // namespace predfb
