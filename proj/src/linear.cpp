#include "predfb/linear.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "predfb/math_util.hpp"

namespace predfb {

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Mat G = M.transpose() * M;
  const int n = static_cast<int>(G.rows());
  // Graded deterministic start so the iterate is never orthogonal to the top
  // eigenspace by symmetry.
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + static_cast<double>(i) / n;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vec w = G * v;
    double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    double next = v.dot(G * v);
    if (std::abs(next - lambda) <= 1e-12 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

LinearGainReport iss_gain(const Mat& A, const Mat& B, const Mat& K) {
  const long n = A.rows();
  if (A.cols() != n || B.rows() != n || K.cols() != n || K.rows() != B.cols())
    throw ValidationError("iss_gain: inconsistent matrix dimensions");
  if (n > 20)
    throw ValidationError("iss_gain: dense solver limited to state dimension 20");
  Mat Acl = A + B * K;
  Eigen::EigenSolver<Mat> eig(Acl);
  double abscissa = eig.eigenvalues().real().maxCoeff();
  if (!(abscissa < 0.0))
    throw ValidationError("iss_gain: closed-loop matrix is not Hurwitz (abscissa " +
                          fmt_g17(abscissa) + ")");
  double mu = 0.9 * (-abscissa);
  Mat M = Acl + mu * Mat::Identity(n, n);

  // Solve M^T P0 + P0 M = -I, vectorized column-major:
  // (I kron M^T + M^T kron I) vec(P0) = vec(-I).
  Mat S = Mat::Zero(n * n, n * n);
  Mat Mt = M.transpose();
  for (long j = 0; j < n; ++j)
    S.block(j * n, j * n, n, n) += Mt;
  for (long j = 0; j < n; ++j)
    for (long l = 0; l < n; ++l)
      for (long i = 0; i < n; ++i)
        S(j * n + i, l * n + i) += Mt(j, l);
  Vec rhs = Vec::Zero(n * n);
  for (long i = 0; i < n; ++i) rhs[i * n + i] = -1.0;
  Vec p = S.colPivHouseholderQr().solve(rhs);
  Mat P0(n, n);
  for (long j = 0; j < n; ++j) P0.col(j) = p.segment(j * n, n);
  P0 = 0.5 * (P0 + P0.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> sa(P0);
  double lmin = sa.eigenvalues().minCoeff();
  if (!(lmin > 0.0))
    throw NumericError("iss_gain: Lyapunov solution not positive definite");
  LinearGainReport rep;
  rep.P = P0 / lmin;
  rep.mu = mu;
  rep.abscissa = abscissa;
  rep.gamma = rep.margin * std::sqrt(spectral_norm(B.transpose() * rep.P * B)) / mu;
  return rep;
}

MinGridResult min_grid_count(const LinearSystem& lin, double sample_period,
                             double gamma) {
  if (!(lin.delay > 0.0) || !(sample_period > 0.0) || !(gamma > 0.0))
    throw ValidationError("min_grid_count: delay, sample_period, gamma must be positive");
  double a = spectral_norm(lin.A);
  double b = spectral_norm(lin.B);
  double k = spectral_norm(lin.K);
  double ea = std::exp(a * lin.delay);
  double inner = a * gamma * ea + b * (a * lin.delay * ea + 1.0) * (1.0 + gamma * k);
  MinGridResult res;
  res.lhs = lin.delay * k * std::exp(a * sample_period) * inner * (ea - 1.0);
  if (!std::isfinite(res.lhs))
    throw NumericError("min_grid_count: requirement overflow");
  res.n_star = 1 + static_cast<long long>(std::floor(res.lhs / 2.0));
  return res;
}

FSweepResult f_sweep(double sample_period, const std::vector<double>& p_grid) {
  if (!(sample_period > 0.0))
    throw ValidationError("f_sweep: sample_period must be positive");
  if (p_grid.empty()) throw ValidationError("f_sweep: empty gain grid");
  const double e1 = std::exp(1.0);
  const double er = std::exp(sample_period);
  FSweepResult res;
  res.rows.reserve(p_grid.size());
  res.f_min = std::numeric_limits<double>::infinity();
  for (double p : p_grid) {
    if (!(p > 1.0))
      throw ValidationError("f_sweep: gain " + fmt_g17(p) +
                            " is not stabilizing (need p > 1)");
    double f = p * er * (e1 + (e1 + 1.0) * (2.0 * p - 1.0)) * (e1 - 1.0) /
               (2.0 * (p - 1.0));
    res.rows.emplace_back(p, f);
    if (f < res.f_min) {
      res.f_min = f;
      res.argmin_p = p;
    }
  }
  LinearSystem bench;
  bench.A = Mat::Constant(1, 1, 1.0);
  bench.B = Mat::Constant(1, 1, 1.0);
  bench.K = Mat::Constant(1, 1, -res.argmin_p);
  bench.delay = 1.0;
  res.n_star_at_argmin =
      min_grid_count(bench, sample_period, 1.0 / (res.argmin_p - 1.0)).n_star;
  return res;
}

Vec linear_predict(const Mat& A, const Mat& B, const InputHistory& hist,
                   const Vec& x, double t, double delay, long long steps) {
  if (steps <= 0) throw ValidationError("linear_predict: steps must be positive");
  if (!(delay > 0.0)) throw ValidationError("linear_predict: delay must be positive");
  double window_start = t - delay;
  double h = delay / static_cast<double>(steps);
  Vec z = x;
  for (long long j = 0; j < steps; ++j) {
    double a = window_start + static_cast<double>(j) * h;
    double b = (j == steps - 1) ? t : window_start + static_cast<double>(j + 1) * h;
    z = z + h * (A * z) + B * hist.integral(a, b);
  }
  return z;
}

double linear_error_bound(double a_norm, double b_norm, double delay,
                          long long n_steps, double x0_norm, double input_sup) {
  if (n_steps <= 0) throw ValidationError("linear_error_bound: steps must be positive");
  if (!(delay > 0.0)) throw ValidationError("linear_error_bound: delay must be positive");
  double h = delay / static_cast<double>(n_steps);
  double ea = std::exp(a_norm * delay);
  double state_term = 0.5 * h * a_norm * (ea - 1.0) * ea * x0_norm;
  double input_term =
      0.5 * h * b_norm * (a_norm * delay * ea + 1.0) * (ea - 1.0) * input_sup;
  return state_term + input_term;
}

}  // namespace predfb
