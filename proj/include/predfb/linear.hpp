#pragma once

#include <vector>

#include "predfb/input_history.hpp"
#include "predfb/system.hpp"
#include "predfb/types.hpp"

namespace predfb {

// Spectral norm |M| by power iteration on M^T M; deterministic start vector,
// relative tolerance 1e-12.
double spectral_norm(const Mat& M);

// Quadratic ISS certificate for x' = (A + B K) x + B w:
// P with P >= I solving a shifted Lyapunov equation, decay mu, and gain gamma
// such that |x(t)|_P decays at rate mu against sup |w| with gain gamma.
struct LinearGainReport {
  Mat P;
  double mu = 0.0;      // guaranteed decay rate (90% of the spectral margin)
  double gamma = 0.0;   // ISS gain from prediction error to state
  double margin = 1.05; // headroom factor baked into gamma
  double abscissa = 0.0;  // max real part of the closed-loop spectrum
};
LinearGainReport iss_gain(const Mat& A, const Mat& B, const Mat& K);

// Sampled predictor loop grid requirement: the smallest Euler grid count that
// keeps the certified prediction error inside the gain margin gamma, for
// sampling period `sample_period` and the plant's own delay.
struct MinGridResult {
  double lhs = 0.0;       // scale factor multiplying the step size
  long long n_star = 0;   // 1 + floor(lhs / 2)
};
MinGridResult min_grid_count(const LinearSystem& lin, double sample_period,
                             double gamma);

// Grid-count objective over the scalar benchmark family x' = x + u(t-1) with
// feedback gain p and its matched ISS gain 1/(p-1), evaluated in closed form:
//   f(p) = p e^r (e + (e+1)(2p-1)) (e-1) / (2 (p-1)).
// Rejects grid entries at or below 1, where the family loses stabilizability.
struct FSweepResult {
  std::vector<std::pair<double, double>> rows;  // (p, objective)
  double argmin_p = 0.0;
  double f_min = 0.0;
  long long n_star_at_argmin = 0;
};
FSweepResult f_sweep(double sample_period, const std::vector<double>& p_grid);

// Euler predictor for the linear plant: z_{j+1} = (I + hA) z_j + B * (exact
// integral of the recorded input over the j-th cell), started from x at the
// current time; returns the prediction one delay ahead.
Vec linear_predict(const Mat& A, const Mat& B, const InputHistory& hist,
                   const Vec& x, double t, double delay, long long steps);

// Certified terminal error bound for the linear Euler predictor on an
// n_steps grid (h = delay / n_steps):
//   h/2 * a * (e^{a d} - 1) * e^{a d} * |x0|
// + h/2 * b * (a d e^{a d} + 1) * (e^{a d} - 1) * sup|u|
// with a = |A|, b = |B|, d = delay.
double linear_error_bound(double a_norm, double b_norm, double delay,
                          long long n_steps, double x0_norm, double input_sup);

}  // namespace predfb
