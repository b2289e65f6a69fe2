#include "predfb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "predfb/math_util.hpp"

namespace predfb {

SamplingSchedule make_schedule(ScheduleKind kind, double period, double horizon,
                               std::uint64_t seed) {
  if (!(period > 0.0) || !(horizon > 0.0))
    throw ValidationError("make_schedule: period and horizon must be positive");
  SamplingSchedule sched;
  sched.period = period;
  sched.horizon = horizon;
  const double tol = 1e-9 * std::max(1.0, horizon);
  if (kind == ScheduleKind::Uniform) {
    for (long long i = 0;; ++i) {
      double t = period * static_cast<double>(i);
      if (t > horizon + tol) break;
      sched.times.push_back(t >= horizon - tol ? horizon : t);
      if (t >= horizon - tol) break;
    }
    return sched;
  }
  std::mt19937_64 rng(splitmix64(seed, 0x5C4EDull));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double t = 0.0;
  sched.times.push_back(0.0);
  while (true) {
    double gap = (kind == ScheduleKind::Jittered) ? period * (0.5 + 0.5 * unit(rng))
                                                  : period * (1.0 - unit(rng));
    t += gap;
    if (t >= horizon - tol) break;
    sched.times.push_back(t);
  }
  return sched;
}

namespace {

struct LoopHooks {
  int state_dim = 0;
  int input_dim = 0;
  // Predict the plant state one delay ahead from the recorded inputs.
  std::function<PredictorOutput(const InputHistory&, const Vec&, double)> predictor;
  VectorField plant_rhs;                    // dx/dt = plant_rhs(x, u(t - delay))
  std::function<Vec(const Vec&)> ctrl_rhs;  // controller state flow
  StateMap control;                         // applied input from the controller state
};

// One RK4 step for the plant driven by the recorded delayed input.
Vec plant_step(const LoopHooks& hooks, const InputHistory& hist, double delay,
               const Vec& x, double t, double h) {
  Vec u0 = hist.value(t - delay);
  Vec um = hist.value(t + 0.5 * h - delay);
  Vec u1 = hist.value(t + h - delay);
  Vec k1 = hooks.plant_rhs(x, u0);
  Vec k2 = hooks.plant_rhs(x + 0.5 * h * k1, um);
  Vec k3 = hooks.plant_rhs(x + 0.5 * h * k2, um);
  Vec k4 = hooks.plant_rhs(x + h * k3, u1);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec ctrl_step(const LoopHooks& hooks, const Vec& z, double h) {
  Vec k1 = hooks.ctrl_rhs(z);
  Vec k2 = hooks.ctrl_rhs(z + 0.5 * h * k1);
  Vec k3 = hooks.ctrl_rhs(z + 0.5 * h * k2);
  Vec k4 = hooks.ctrl_rhs(z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory run_loop(const LoopHooks& hooks, double delay,
                    const SamplingSchedule& schedule, const Vec& x0,
                    const InputSignal& u_init, const SimOptions& opts) {
  if (!(delay > 0.0)) throw ValidationError("simulate: delay must be positive");
  if (x0.size() != hooks.state_dim)
    throw ValidationError("simulate: initial state dimension mismatch");
  if (opts.steps_per_unit < 1)
    throw ValidationError("simulate: steps_per_unit must be at least 1");
  if (schedule.times.empty() || schedule.times.front() != 0.0)
    throw ValidationError("simulate: schedule must start at t = 0");
  const double horizon = schedule.horizon;
  if (!(horizon > 0.0)) throw ValidationError("simulate: horizon must be positive");
  for (std::size_t i = 0; i + 1 < schedule.times.size(); ++i)
    if (!(schedule.times[i] < schedule.times[i + 1]))
      throw ValidationError("simulate: schedule times must increase");
  if (schedule.times.back() > horizon + 1e-9 * std::max(1.0, horizon))
    throw ValidationError("simulate: schedule instant beyond the horizon");

  // Recording step: divide the delay evenly so that delayed lookups of
  // recorded grid points land on recorded grid points again.
  double want = opts.record_dt > 0.0 ? opts.record_dt : delay / 1000.0;
  long long per_delay =
      std::max<long long>(1, static_cast<long long>(std::ceil(delay / want - 1e-9)));
  const double dt = delay / static_cast<double>(per_delay);

  Trajectory traj;
  traj.delay = delay;

  // Input prefill on [-delay, 0); the value at 0 seeds the interpolation
  // boundary and is replaced by the first computed control.
  InputHistory hist(hooks.input_dim, delay, 1.5 * dt);
  for (long long j = 0; j <= per_delay; ++j) {
    double t = (j == per_delay) ? 0.0 : -delay + static_cast<double>(j) * dt;
    Vec u = u_init(t);
    if (u.size() != hooks.input_dim)
      throw ValidationError("simulate: u_init returned wrong dimension");
    hist.record(t, u);
    if (j < per_delay) traj.prelude_times.push_back(t);
  }
  traj.prelude_u.resize(hooks.input_dim, static_cast<long>(traj.prelude_times.size()));
  for (std::size_t j = 0; j < traj.prelude_times.size(); ++j)
    traj.prelude_u.col(static_cast<long>(j)) = hist.samples()[j].u;

  // Recording nodes: multiples of dt, plus every schedule instant and the
  // horizon. Schedule instants absorb grid nodes within 1e-12.
  std::vector<double> rec_nodes;
  {
    std::vector<double> grid;
    for (long long j = 0;; ++j) {
      double t = static_cast<double>(j) * dt;
      if (t > horizon + 1e-12) break;
      grid.push_back(std::min(t, horizon));
      if (t >= horizon - 1e-12) break;
    }
    if (grid.back() < horizon - 1e-12) grid.push_back(horizon);
    std::vector<double> merged = grid;
    merged.insert(merged.end(), schedule.times.begin(), schedule.times.end());
    std::sort(merged.begin(), merged.end());
    for (double t : merged) {
      bool is_sched =
          std::binary_search(schedule.times.begin(), schedule.times.end(), t);
      if (!rec_nodes.empty() && t - rec_nodes.back() < 1e-12) {
        if (is_sched) rec_nodes.back() = t;  // keep the exact schedule instant
        continue;
      }
      rec_nodes.push_back(t);
    }
  }

  const std::size_t n_rows = rec_nodes.size();
  traj.times = rec_nodes;
  traj.x.resize(hooks.state_dim, static_cast<long>(n_rows));
  traj.z.resize(hooks.state_dim, static_cast<long>(n_rows));
  traj.u.resize(hooks.input_dim, static_cast<long>(n_rows));
  traj.is_sample.assign(n_rows, 0);
  traj.grid_used.assign(n_rows, 0);

  Vec x = x0;
  Vec z = Vec::Zero(hooks.state_dim);
  long long grid_now = 0;
  std::size_t row = 0;
  std::size_t sched_idx = 0;

  auto emit_row = [&](double t, const Vec& u_now, bool sample) {
    traj.x.col(static_cast<long>(row)) = x;
    traj.z.col(static_cast<long>(row)) = z;
    traj.u.col(static_cast<long>(row)) = u_now;
    traj.is_sample[row] = sample ? 1 : 0;
    traj.grid_used[row] = grid_now;
    if (std::abs(traj.times[row] - t) > 1e-9)
      throw NumericError("simulate: recording grid desynchronized");
    ++row;
  };

  while (sched_idx < schedule.times.size()) {
    double t_sample = schedule.times[sched_idx];
    double t_next = (sched_idx + 1 < schedule.times.size())
                        ? schedule.times[sched_idx + 1]
                        : horizon;

    // Controller activation: predict, reset, switch the applied input.
    PredictorOutput pred = hooks.predictor(hist, x, t_sample);
    z = pred.z;
    grid_now = pred.steps;
    Vec u_now = hooks.control(z);
    hist.record(t_sample, u_now);  // replaces the pre-switch boundary value
    traj.samples.push_back({t_sample, pred});
    emit_row(t_sample, u_now, true);

    // Integration nodes inside the segment: recording nodes plus the images
    // of older activation instants one delay later, where the delayed input
    // has derivative breaks the integrator must not straddle.
    std::vector<double> nodes;
    while (row < n_rows && traj.times[row] <= t_next + 1e-12 &&
           !(sched_idx + 1 < schedule.times.size() && traj.times[row] >= t_next))
      nodes.push_back(traj.times[row++]);
    row -= nodes.size();  // re-emitted as we integrate past them
    std::vector<double> extra;
    for (const auto& sp : traj.samples) {
      double img = sp.t + delay;
      if (img > t_sample + 1e-12 && img < t_next - 1e-12) extra.push_back(img);
    }
    std::vector<double> all_nodes;
    all_nodes.push_back(t_sample);
    all_nodes.insert(all_nodes.end(), nodes.begin(), nodes.end());
    all_nodes.insert(all_nodes.end(), extra.begin(), extra.end());
    if (sched_idx + 1 < schedule.times.size()) all_nodes.push_back(t_next);
    std::sort(all_nodes.begin(), all_nodes.end());
    all_nodes.erase(std::unique(all_nodes.begin(), all_nodes.end(),
                                [](double a, double b) { return b - a < 1e-12; }),
                    all_nodes.end());

    std::size_t rec_cursor = 0;  // position within `nodes`
    for (std::size_t k = 0; k + 1 < all_nodes.size(); ++k) {
      double na = all_nodes[k], nb = all_nodes[k + 1];
      long long nsub = std::max<long long>(
          1, static_cast<long long>(std::ceil((nb - na) * opts.steps_per_unit - 1e-9)));
      double hstep = (nb - na) / static_cast<double>(nsub);
      for (long long q = 0; q < nsub; ++q) {
        double t = na + static_cast<double>(q) * hstep;
        x = plant_step(hooks, hist, delay, x, t, hstep);
        z = ctrl_step(hooks, z, hstep);
      }
      if (!x.allFinite() || !z.allFinite())
        throw NumericError("simulate: non-finite state at t=" + fmt_g17(nb));
      Vec u_b = hooks.control(z);
      bool last_node = (k + 2 == all_nodes.size());
      bool is_next_sample = last_node && (sched_idx + 1 < schedule.times.size());
      if (is_next_sample) {
        // Boundary value of the outgoing segment; the next activation
        // overwrites it to keep the applied input right-continuous.
        hist.record(nb, u_b);
        break;
      }
      hist.record(nb, u_b);
      while (rec_cursor < nodes.size() && nodes[rec_cursor] <= nb + 1e-12) {
        if (std::abs(nodes[rec_cursor] - nb) <= 1e-12) emit_row(nb, u_b, false);
        ++rec_cursor;
      }
    }
    hist.evict_before(t_sample - delay);
    ++sched_idx;
  }
  if (row != n_rows)
    throw NumericError("simulate: not all recording rows were written");
  return traj;
}

// Metric m(t) = |x(t)| + sup of recorded |u| over [t - window, t), per row.
// The sliding maximum walks the prelude-plus-rows series once with a
// monotone deque.
std::vector<double> metric_series(const Trajectory& traj, double window) {
  const std::size_t n = traj.times.size();
  const std::size_t p = traj.prelude_times.size();
  std::vector<double> ut(p + n), un(p + n);
  for (std::size_t j = 0; j < p; ++j) {
    ut[j] = traj.prelude_times[j];
    un[j] = traj.prelude_u.col(static_cast<long>(j)).norm();
  }
  for (std::size_t j = 0; j < n; ++j) {
    ut[p + j] = traj.times[j];
    un[p + j] = traj.u.col(static_cast<long>(j)).norm();
  }
  std::vector<double> m(n);
  std::deque<std::size_t> peak;  // indices with decreasing norms
  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double t = traj.times[k];
    // Window [t - window, t): push entrants, drop leavers, read the front.
    while (hi < ut.size() && ut[hi] < t) {
      while (!peak.empty() && un[peak.back()] <= un[hi]) peak.pop_back();
      peak.push_back(hi);
      ++hi;
    }
    while (lo < hi && ut[lo] < t - window) {
      if (!peak.empty() && peak.front() == lo) peak.pop_front();
      ++lo;
    }
    double wsup = peak.empty() ? 0.0 : un[peak.front()];
    m[k] = traj.x.col(static_cast<long>(k)).norm() + wsup;
  }
  return m;
}

// Least-squares slope of log(values) over rows with time >= from; entries
// below 1e-14 are skipped. Returns the number of points used.
std::size_t fit_log_slope(const std::vector<double>& times,
                          const std::vector<double>& values, double from,
                          double* slope, double* intercept) {
  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < from || values[k] < 1e-14) continue;
    double t = times[k], y = std::log(values[k]);
    sw += 1.0;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++used;
  }
  *slope = 0.0;
  *intercept = 0.0;
  if (used < 2) return used;
  double det = sw * stt - st * st;
  if (det <= 0.0) return used;
  *slope = (sw * sty - st * sy) / det;
  *intercept = (sy * stt - st * sty) / det;
  return used;
}

}  // namespace

Trajectory simulate_nonlinear(const NonlinearSystem& sys, const BoundsPack& pack,
                              const AccuracyFn& accuracy,
                              const SamplingSchedule& schedule, const Vec& x0,
                              const InputSignal& u_init, const SimOptions& opts) {
  LoopHooks hooks;
  hooks.state_dim = sys.state_dim;
  hooks.input_dim = sys.input_dim;
  hooks.plant_rhs = sys.dynamics;
  hooks.ctrl_rhs = [&sys](const Vec& z) { return sys.dynamics(z, sys.feedback(z)); };
  hooks.control = sys.feedback;
  double n_max = opts.n_max;
  if (opts.forced_grid) {
    long long forced = *opts.forced_grid;
    if (forced < 1)
      throw ValidationError("simulate_nonlinear: forced grid must be >= 1");
    hooks.predictor = [&sys, &pack, &accuracy, forced](const InputHistory& hist,
                                                       const Vec& x, double t) {
      PredictorOutput out;
      out.steps = forced;
      out.h = pack.horizon / static_cast<double>(forced);
      Mat states =
          euler_trajectory(sys, x, hist, t - pack.horizon, pack.horizon, forced);
      out.z = states.col(forced);
      double sup = hist.sup_norm_window(t);
      out.size_measure = x.norm() + sup;
      out.apriori_bound = apriori_error_bound(pack, out.size_measure, forced);
      out.accuracy_target = accuracy.value ? accuracy.value(out.size_measure) : 0.0;
      return out;
    };
  } else {
    hooks.predictor = [&sys, &pack, &accuracy, n_max](const InputHistory& hist,
                                                      const Vec& x, double t) {
      return predict(sys, pack, accuracy, hist, x, t, n_max);
    };
  }
  return run_loop(hooks, pack.horizon, schedule, x0, u_init, opts);
}

Trajectory simulate_linear(const LinearSystem& sys,
                           const SamplingSchedule& schedule, const Vec& x0,
                           const InputSignal& u_init, const SimOptions& opts,
                           long long grid) {
  if (grid < 1) throw ValidationError("simulate_linear: grid must be >= 1");
  LoopHooks hooks;
  hooks.state_dim = static_cast<int>(sys.A.rows());
  hooks.input_dim = static_cast<int>(sys.B.cols());
  Mat A = sys.A, B = sys.B, K = sys.K;
  Mat Acl = A + B * K;
  hooks.plant_rhs = [A, B](const Vec& x, const Vec& u) -> Vec { return A * x + B * u; };
  hooks.ctrl_rhs = [Acl](const Vec& z) -> Vec { return Acl * z; };
  hooks.control = [K](const Vec& z) -> Vec { return K * z; };
  double delay = sys.delay;
  double a_norm = spectral_norm(A), b_norm = spectral_norm(B);
  hooks.predictor = [A, B, delay, grid, a_norm, b_norm](const InputHistory& hist,
                                                        const Vec& x, double t) {
    PredictorOutput out;
    out.steps = grid;
    out.h = delay / static_cast<double>(grid);
    out.z = linear_predict(A, B, hist, x, t, delay, grid);
    double sup = hist.sup_norm_window(t);
    out.size_measure = x.norm() + sup;
    out.apriori_bound = linear_error_bound(a_norm, b_norm, delay, grid, x.norm(), sup);
    out.accuracy_target = out.apriori_bound;
    return out;
  };
  return run_loop(hooks, delay, schedule, x0, u_init, opts);
}

DecayFit decay_fit(const Trajectory& traj, double window) {
  DecayFit fit;
  const std::size_t n = traj.times.size();
  if (n == 0) throw ValidationError("decay_fit: empty trajectory");
  if (!(window > 0.0) || !std::isfinite(window))
    throw ValidationError("decay_fit: window must be positive and finite");
  const double span = traj.times.back() - traj.times.front();
  if (span < 5.0 * window - 1e-9)
    throw ValidationError("decay_fit: run spans " + fmt_g17(span) +
                          ", need at least 5 windows (" + fmt_g17(5.0 * window) + ")");

  fit.m = metric_series(traj, window);
  double m_first = fit.m.front(), m_last = fit.m.back();
  fit.final_ratio = m_first > 0.0 ? m_last / m_first : 0.0;

  // Least squares on log m over the trailing 60% of the run.
  double t_cut = traj.times.front() + 0.4 * span;
  double slope = 0.0, intercept = 0.0;
  std::size_t used = fit_log_slope(traj.times, fit.m, t_cut, &slope, &intercept);
  if (used < 2) {  // effectively extinct signal: zero rate, vacuous envelope
    fit.envelope_ok = true;
    return fit;
  }
  fit.rate = -slope;
  fit.log_m0 = intercept;
  double excess = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (fit.m[k] < 1e-14) continue;
    double envelope = std::exp(intercept + slope * traj.times[k]);
    excess = std::max(excess, fit.m[k] / envelope - 1.0);
  }
  fit.envelope_excess = excess;
  fit.envelope_ok = excess <= 0.10;
  return fit;
}

ClaimReport claim_checks(const Trajectory& traj, const DerivedDesign& design,
                         const FeedbackCertificate& fb, double tol) {
  ClaimReport rep;
  const std::size_t n = traj.times.size();
  if (n == 0) throw ValidationError("claim_checks: empty trajectory");
  rep.ultimate_level = fb.decay.inverse(2.0 * design.residual_level) + tol;

  std::vector<double> v(n), xn(n), un(n);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = fb.lyapunov(traj.x.col(static_cast<long>(k)));
    xn[k] = traj.x.col(static_cast<long>(k)).norm();
    un[k] = traj.u.col(static_cast<long>(k)).norm();
  }

  bool reached = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (!reached && v[k] <= rep.ultimate_level) {
      reached = true;
      rep.reach_time = traj.times[k];
      rep.stayed = true;
      rep.max_after_reach = v[k];
    } else if (reached) {
      rep.max_after_reach = std::max(rep.max_after_reach, v[k]);
      if (v[k] > rep.ultimate_level) rep.stayed = false;
    }
  }
  rep.ultimate_ok = reached && rep.stayed;

  // First sampling time whose one-delay-later state sits inside the capture
  // level; rows at or after that instant carry the exponential tail.
  for (const auto& sp : traj.samples) {
    double target = sp.t + traj.delay;
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(),
                               target - 1e-9 * std::max(1.0, target));
    if (it == traj.times.end()) break;
    std::size_t k = static_cast<std::size_t>(it - traj.times.begin());
    if (v[k] <= design.capture_level) {
      rep.capture_time = sp.t;
      break;
    }
  }
  if (rep.capture_time >= 0.0) {
    double slope = 0.0, intercept = 0.0;
    std::size_t used_x =
        fit_log_slope(traj.times, xn, rep.capture_time, &slope, &intercept);
    rep.state_rate = used_x >= 2 ? -slope : 0.0;
    std::size_t used_u =
        fit_log_slope(traj.times, un, rep.capture_time, &slope, &intercept);
    rep.input_rate = used_u >= 2 ? -slope : 0.0;
    rep.exponential_ok =
        (used_x < 2 || rep.state_rate > 0.0) && (used_u < 2 || rep.input_rate > 0.0);
  }

  std::vector<double> m = metric_series(traj, traj.delay);
  rep.sup_metric = *std::max_element(m.begin(), m.end());
  rep.bounded_ok = std::isfinite(rep.sup_metric);

  rep.ok = rep.ultimate_ok && rep.exponential_ok && rep.bounded_ok;
  return rep;
}

}  // namespace predfb
