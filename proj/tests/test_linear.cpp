#include <doctest.h>

#include <cmath>
#include <vector>

#include "predfb/builtins.hpp"
#include "predfb/linear.hpp"
#include "predfb/oracle.hpp"

using namespace predfb;

namespace {
Vec v1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}
}  // namespace

TEST_CASE("spectral_norm on diagonal and rectangular matrices") {
  Mat d(2, 2);
  d << 3.0, 0.0, 0.0, -4.0;
  CHECK(spectral_norm(d) == doctest::Approx(4.0).epsilon(1e-10));
  Mat r(1, 3);
  r << 1.0, 2.0, 2.0;
  CHECK(spectral_norm(r) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("iss_gain resolves the scalar integrator certificate") {
  Mat A = Mat::Constant(1, 1, 0.0);
  Mat B = Mat::Constant(1, 1, 1.0);
  Mat K = Mat::Constant(1, 1, -1.0);
  LinearGainReport rep = iss_gain(A, B, K);
  CHECK(rep.abscissa == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rep.mu == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(rep.P(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.gamma == doctest::Approx(1.05 / 0.9).epsilon(1e-10));
}

TEST_CASE("iss_gain rejects unusable inputs") {
  Mat A = Mat::Constant(1, 1, 1.0);
  Mat B = Mat::Constant(1, 1, 1.0);
  CHECK_THROWS_AS(iss_gain(A, B, Mat::Constant(1, 1, 0.5)), ValidationError);
  CHECK_THROWS_AS(iss_gain(A, Mat::Zero(2, 1), Mat::Constant(1, 1, -2.0)),
                  ValidationError);
  Mat big = -Mat::Identity(21, 21);
  CHECK_THROWS_AS(iss_gain(big, Mat::Identity(21, 21), Mat::Zero(21, 21)),
                  ValidationError);
}

TEST_CASE("decay against the discounted input sup holds on a driven run") {
  // x' = -x + w with w = sin(3t):
  // |x(t)|_P <= e^{-mu t} |x0|_P + gamma * sup_s e^{-mu (t-s)} |w(s)|.
  Mat A = Mat::Constant(1, 1, 0.0);
  Mat B = Mat::Constant(1, 1, 1.0);
  Mat K = Mat::Constant(1, 1, -1.0);
  LinearGainReport rep = iss_gain(A, B, K);

  const double x0 = 2.0, t_end = 6.0;
  const int n = 6000;
  const double h = t_end / n;
  auto w = [](double t) { return std::sin(3.0 * t); };
  VectorField f = [&](const Vec& x, const Vec& u) -> Vec { return -x + u; };
  InputSignal ws = [&](double t) { return v1(w(t)); };

  Mat states = rk4_on_grid(f, ws, v1(x0), 0.0, h, n, 1);
  double disc_sup = 0.0;
  for (int i = 1; i <= n; ++i) {
    double t = i * h;
    disc_sup = disc_sup * std::exp(-rep.mu * h);
    disc_sup = std::max(disc_sup, std::abs(w(t)));
    double lhs = std::abs(states(0, i));
    double rhs = std::exp(-rep.mu * t) * x0 + rep.gamma * disc_sup;
    CHECK(lhs <= rhs * 1.05);
  }
}

TEST_CASE("min_grid_count reproduces the benchmark grid requirement") {
  LinearSystem lin = benchmark_linear(1.93);
  MinGridResult g = min_grid_count(lin, 1.0, 1.0 / 0.93);
  CHECK(g.n_star == 65);
  CHECK(g.lhs / 2.0 == doctest::Approx(64.71).epsilon(1e-3));
}

TEST_CASE("f_sweep locates the benchmark minimum") {
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double p = 1.01 + 0.01 * i;
    if (p > 10.0 + 1e-12) break;
    grid.push_back(p);
  }
  FSweepResult res = f_sweep(1.0, grid);
  CHECK(res.argmin_p == doctest::Approx(1.93).epsilon(1e-9));
  CHECK(std::abs(res.f_min - 64.71) < 0.05);
  CHECK(res.n_star_at_argmin == 65);
  CHECK(res.rows.size() == grid.size());
}

TEST_CASE("f_sweep rejects non-stabilizing and empty grids") {
  CHECK_THROWS_AS(f_sweep(1.0, {}), ValidationError);
  CHECK_THROWS_AS(f_sweep(1.0, {2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(f_sweep(1.0, {0.5}), ValidationError);
}

TEST_CASE("predictor with zero input reproduces the compounding factor") {
  Mat A = Mat::Constant(1, 1, 1.0);
  Mat B = Mat::Constant(1, 1, 1.0);
  InputHistory hist(1, 1.0);
  hist.record(0.0, v1(0.0));
  hist.record(1.0, v1(0.0));
  Vec z = linear_predict(A, B, hist, v1(1.0), 1.0, 1.0, 65);
  CHECK(z(0) == doctest::Approx(std::pow(66.0 / 65.0, 65)).epsilon(1e-14));
}

TEST_CASE("predictor input integrals are exact for piecewise-linear inputs") {
  // With A = 0 the prediction is x0 + b * (integral of u), independent of N.
  Mat A = Mat::Constant(1, 1, 0.0);
  Mat B = Mat::Constant(1, 1, 2.0);
  InputHistory hist(1, 1.0);
  hist.record(0.0, v1(0.0));
  hist.record(0.3, v1(0.3));
  hist.record(1.0, v1(1.0));
  for (long long n : {1, 7, 64}) {
    Vec z = linear_predict(A, B, hist, v1(0.5), 1.0, 1.0, n);
    CHECK(z(0) == doctest::Approx(0.5 + 2.0 * 0.5).epsilon(1e-15));
  }
}

TEST_CASE("error bound scales linearly with the step size") {
  double b1 = linear_error_bound(1.5, 0.7, 1.0, 64, 1.0, 1.0);
  double b2 = linear_error_bound(1.5, 0.7, 1.0, 128, 1.0, 1.0);
  CHECK(b1 / b2 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(linear_error_bound(0.0, 0.0, 1.0, 8, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(linear_error_bound(1.0, 1.0, 1.0, 0, 1.0, 1.0), ValidationError);
}

TEST_CASE("error bound dominates the measured error on a hand-checked case") {
  // x' = x + u with u(s) = 1: x(1) = x0 e + (e - 1).
  Mat A = Mat::Constant(1, 1, 1.0);
  Mat B = Mat::Constant(1, 1, 1.0);
  InputHistory hist(1, 1.0);
  hist.record(0.0, v1(1.0));
  hist.record(1.0, v1(1.0));
  double exact = std::exp(1.0) + (std::exp(1.0) - 1.0);
  for (long long n : {8, 32, 128}) {
    Vec z = linear_predict(A, B, hist, v1(1.0), 1.0, 1.0, n);
    double err = std::abs(z(0) - exact);
    double bound = linear_error_bound(1.0, 1.0, 1.0, n, 1.0, 1.0);
    CHECK(err <= bound);
  }
}
