#include "predfb/math_util.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace predfb {

double log_expm1(double x) {
  if (!(x > 0.0)) throw NumericError("log_expm1: argument must be positive");
  if (x > 36.0) return x + std::log1p(-std::exp(-x));  // exp(-x) < 2e-16, exact enough
  return std::log(std::expm1(x));
}

std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + index * 0x9E3779B97F4A7C15ull + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

KFn::KFn(std::string name, ScalarFn fn, double domain_hi)
    : name_(std::move(name)),
      fn_(std::move(fn)),
      domain_hi_(domain_hi),
      warned_(std::make_shared<std::atomic<bool>>(false)) {
  if (!(domain_hi_ > 0.0)) throw ValidationError("KFn " + name_ + ": domain_hi must be positive");
  double v0 = fn_(0.0);
  if (std::abs(v0) > 1e-12)
    throw ValidationError("KFn " + name_ + ": must vanish at 0, got " + fmt_g17(v0));
  double vhi = fn_(domain_hi_);
  if (!(vhi > 0.0) || !std::isfinite(vhi))
    throw ValidationError("KFn " + name_ + ": not positive/finite at domain end");
  // Last secant slope over the final 1% of the calibrated range; guards with
  // the full-range chord if the tail is numerically flat.
  secant_ = (vhi - fn_(0.99 * domain_hi_)) / (0.01 * domain_hi_);
  if (!(secant_ > 0.0) || !std::isfinite(secant_)) secant_ = vhi / domain_hi_;
}

double KFn::operator()(double s) const {
  if (!fn_) throw ValidationError("KFn: called before initialization");
  if (s < 0.0) throw ValidationError("KFn " + name_ + ": negative argument");
  if (s <= domain_hi_) return fn_(s);
  if (warned_ && !warned_->exchange(true))
    std::fprintf(stderr,
                 "warning: KFn %s queried at %s beyond calibrated domain %s; "
                 "extending by the last secant slope\n",
                 name_.c_str(), fmt_g17(s).c_str(), fmt_g17(domain_hi_).c_str());
  return fn_(domain_hi_) + secant_ * (s - domain_hi_);
}

double KFn::inverse(double y) const {
  if (!fn_) throw ValidationError("KFn: inverse before initialization");
  if (y < 0.0) throw ValidationError("KFn " + name_ + ": inverse of negative value");
  if (y == 0.0) return 0.0;
  auto wrap = [this](double s) { return (*this)(s); };
  double hi = 1.0;
  for (int i = 0; i < 1200 && wrap(hi) < y; ++i) hi *= 2.0;
  if (wrap(hi) < y) throw NumericError("KFn " + name_ + ": inverse bracket failed for y=" + fmt_g17(y));
  return solve_increasing(wrap, y, 0.0, hi, "inverse of " + name_);
}

double solve_increasing(const ScalarFn& g, double y, double lo, double hi,
                        const std::string& what) {
  double glo = g(lo), ghi = g(hi);
  if (!(glo <= y && y <= ghi))
    throw NumericError("solve_increasing (" + what + "): y=" + fmt_g17(y) +
                       " outside [" + fmt_g17(glo) + ", " + fmt_g17(ghi) + "]");
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval collapsed to adjacent doubles
    if (g(mid) < y)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-12 * (1.0 + std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace predfb
