#include "predfb/system.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "predfb/linear.hpp"
#include "predfb/math_util.hpp"

namespace predfb {

Vec eval_dynamics(const NonlinearSystem& sys, const Vec& x, const Vec& u) {
  if (x.size() != sys.state_dim)
    throw ValidationError("eval_dynamics: state has dim " + std::to_string(x.size()) +
                          ", expected " + std::to_string(sys.state_dim));
  if (u.size() != sys.input_dim)
    throw ValidationError("eval_dynamics: input has dim " + std::to_string(u.size()) +
                          ", expected " + std::to_string(sys.input_dim));
  Vec out = sys.dynamics(x, u);
  if (out.size() != sys.state_dim)
    throw ValidationError("eval_dynamics: dynamics returned dim " +
                          std::to_string(out.size()));
  return out;
}

void validate_system(const NonlinearSystem& sys) {
  if (sys.state_dim <= 0 || sys.input_dim <= 0)
    throw ValidationError("validate_system: dimensions must be positive");
  if (!sys.dynamics || !sys.feedback || !sys.growth)
    throw ValidationError("validate_system: dynamics, feedback and growth must be set");
  Vec x0 = Vec::Zero(sys.state_dim);
  Vec u0 = Vec::Zero(sys.input_dim);
  if (eval_dynamics(sys, x0, u0).norm() > 1e-12)
    throw ValidationError("validate_system: dynamics must vanish at the origin");
  Vec k0 = sys.feedback(x0);
  if (k0.size() != sys.input_dim)
    throw ValidationError("validate_system: feedback returned dim " +
                          std::to_string(k0.size()));
  if (k0.norm() > 1e-12)
    throw ValidationError("validate_system: feedback must vanish at the origin");
  double prev = 0.0;
  for (double s : {0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
    double g = sys.growth(s);
    if (!std::isfinite(g) || g < 1.0 - 1e-12)
      throw ValidationError("validate_system: growth must stay >= 1");
    if (g < prev - 1e-12 * std::max(1.0, prev))
      throw ValidationError("validate_system: growth must be nondecreasing");
    prev = g;
  }
}

namespace {

// Fold both envelope ratios for one (x, y, u) triple into `rep`. Increment
// pairs closer than 1e-14 and magnitudes below 1e-14 are skipped: the ratio
// is 0/0 there and the inequalities hold by continuity.
void fold_ratios(const NonlinearSystem& sys, const Vec& x, const Vec& y, const Vec& u,
                 EnvelopeReport* rep) {
  const Vec fx = sys.dynamics(x, u);
  const double dx = (x - y).norm();
  if (dx >= 1e-14) {
    const double scale = x.norm() + y.norm() + u.norm();
    const double ratio = (fx - sys.dynamics(y, u)).norm() / (sys.growth(scale) * dx);
    if (ratio > rep->max_ratio_increment) {
      rep->max_ratio_increment = ratio;
      rep->worst_scale_increment = scale;
    }
  }
  const double s = x.norm() + u.norm();
  if (s >= 1e-14) {
    const double ratio = fx.norm() / (s * sys.growth(s));
    if (ratio > rep->max_ratio_magnitude) {
      rep->max_ratio_magnitude = ratio;
      rep->worst_scale_magnitude = s;
    }
  }
}

void merge_reports(const EnvelopeReport& src, EnvelopeReport* dst) {
  if (src.max_ratio_increment > dst->max_ratio_increment) {
    dst->max_ratio_increment = src.max_ratio_increment;
    dst->worst_scale_increment = src.worst_scale_increment;
  }
  if (src.max_ratio_magnitude > dst->max_ratio_magnitude) {
    dst->max_ratio_magnitude = src.max_ratio_magnitude;
    dst->worst_scale_magnitude = src.worst_scale_magnitude;
  }
}

void finalize(EnvelopeReport* rep) {
  rep->ok = rep->max_ratio_increment <= 1.0 + 1e-9 &&
            rep->max_ratio_magnitude <= 1.0 + 1e-9;
}

// Deterministic prologue: origin and signed axis-aligned vectors at unit and
// full radius, paired exhaustively over states and inputs.
EnvelopeReport special_points(const NonlinearSystem& sys, double radius) {
  auto axis_set = [radius](int dim) {
    std::vector<Vec> out;
    out.push_back(Vec::Zero(dim));
    for (int i = 0; i < dim; ++i)
      for (double sign : {1.0, -1.0})
        for (double scale : {1.0, radius}) {
          Vec e = Vec::Zero(dim);
          e[i] = sign * scale;
          out.push_back(e);
        }
    return out;
  };
  const std::vector<Vec> xs = axis_set(sys.state_dim);
  const std::vector<Vec> us = axis_set(sys.input_dim);
  EnvelopeReport rep;
  for (const Vec& x : xs)
    for (const Vec& y : xs)
      for (const Vec& u : us) fold_ratios(sys, x, y, u, &rep);
  return rep;
}

// One seeded random triple; evaluated identically by the serial and parallel
// drivers so the reduction is order-independent up to the final max.
EnvelopeReport random_triple(const NonlinearSystem& sys, std::uint64_t seed,
                             std::uint64_t index, double radius) {
  std::mt19937_64 rng(splitmix64(seed, index));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto ball = [&](int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = radius * unit(rng);
    return v;
  };
  Vec x = ball(sys.state_dim);
  Vec y = ball(sys.state_dim);
  Vec u = ball(sys.input_dim);
  EnvelopeReport rep;
  fold_ratios(sys, x, y, u, &rep);
  fold_ratios(sys, y, x, u, &rep);
  return rep;
}

void check_envelope_args(const NonlinearSystem& sys, double radius, int n_samples) {
  validate_system(sys);
  if (n_samples <= 0 || !(radius > 0.0))
    throw ValidationError("check_growth_envelope: need positive radius and samples");
}

}  // namespace

EnvelopeReport check_growth_envelope(const NonlinearSystem& sys, double radius,
                                     int n_samples, std::uint64_t seed) {
  check_envelope_args(sys, radius, n_samples);
  std::vector<EnvelopeReport> slots(n_samples);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_samples; ++i)
    slots[i] = random_triple(sys, seed, static_cast<std::uint64_t>(i), radius);
  EnvelopeReport rep = special_points(sys, radius);
  for (const EnvelopeReport& s : slots) merge_reports(s, &rep);
  finalize(&rep);
  return rep;
}

EnvelopeReport check_growth_envelope_serial(const NonlinearSystem& sys, double radius,
                                            int n_samples, std::uint64_t seed) {
  check_envelope_args(sys, radius, n_samples);
  EnvelopeReport rep = special_points(sys, radius);
  for (int i = 0; i < n_samples; ++i) {
    EnvelopeReport s = random_triple(sys, seed, static_cast<std::uint64_t>(i), radius);
    merge_reports(s, &rep);
  }
  finalize(&rep);
  return rep;
}

NonlinearSystem linear_as_nonlinear(const LinearSystem& sys) {
  if (sys.A.rows() != sys.A.cols() || sys.B.rows() != sys.A.rows() ||
      sys.K.cols() != sys.A.rows() || sys.K.rows() != sys.B.cols())
    throw ValidationError("linear_as_nonlinear: inconsistent matrix dimensions");
  NonlinearSystem out;
  out.state_dim = static_cast<int>(sys.A.rows());
  out.input_dim = static_cast<int>(sys.B.cols());
  Mat A = sys.A, B = sys.B, K = sys.K;
  out.dynamics = [A, B](const Vec& x, const Vec& u) -> Vec { return A * x + B * u; };
  out.feedback = [K](const Vec& x) -> Vec { return K * x; };
  const double lip = std::max(1.0, spectral_norm(A) + spectral_norm(B));
  out.growth = [lip](double) { return lip; };
  return out;
}

}  // namespace predfb
