#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "predfb/types.hpp"

namespace predfb {

// log(expm1(x)) without overflow; valid for x > 0.
double log_expm1(double x);

// SplitMix64 mix of a seed and a stream index; used to derive independent
// per-case RNG seeds so parallel sweeps are order-independent.
std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t index);

// Format a double round-trip exactly ("%.17g").
std::string fmt_g17(double v);

// Strictly increasing continuous function on [0, hi] with value 0 at 0,
// extended beyond hi by the last secant slope (measured over the final 1% of
// the calibrated range) so that inverses stay solvable when a design query
// overshoots it; the first such query logs a warning to stderr. `name`
// labels error and warning messages.
class KFn {
 public:
  KFn() = default;
  KFn(std::string name, ScalarFn fn, double domain_hi = 1e8);

  double operator()(double s) const;
  // Solve fn(x) = y for x >= 0 by bracketing + bisection (relative tol 1e-12).
  double inverse(double y) const;
  const std::string& name() const { return name_; }
  double domain_hi() const { return domain_hi_; }

 private:
  std::string name_;
  ScalarFn fn_;
  double domain_hi_ = 1e8;
  double secant_ = 0.0;  // slope of the last in-domain secant, fixed at construction
  std::shared_ptr<std::atomic<bool>> warned_;  // shared across copies
};

// Bracketing + bisection for a continuous monotone increasing g with
// g(lo) <= y <= g(hi); relative tolerance 1e-12. `what` labels errors.
double solve_increasing(const ScalarFn& g, double y, double lo, double hi,
                        const std::string& what);

}  // namespace predfb
