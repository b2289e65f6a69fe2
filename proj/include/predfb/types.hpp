#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace predfb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Scalar function of one real variable (class-K functions, gain curves, ...).
using ScalarFn = std::function<double(double)>;
// Right-hand side f(x, u) of a controlled ODE.
using VectorField = std::function<Vec(const Vec&, const Vec&)>;
// State feedback x -> u.
using StateMap = std::function<Vec(const Vec&)>;
// Scalar function of the state (energy / Lyapunov candidates).
using ScalarField = std::function<double(const Vec&)>;
// Open-loop input signal t -> u(t).
using InputSignal = std::function<Vec(double)>;

// Bad user-supplied data: dimensions, ranges, config fields.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: divergence, bracketing failure, overflow.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Requested certified accuracy needs more Euler steps than the configured cap.
struct GridCapError : NumericError {
  GridCapError(const std::string& what, double required_steps)
      : NumericError(what), required(required_steps) {}
  double required;  // steps needed, may exceed 2^53 and is kept as double
};

}  // namespace predfb
