#pragma once

#include "predfb/euler.hpp"
#include "predfb/lyapunov.hpp"
#include "predfb/system.hpp"

namespace predfb {

// Scalar benchmark plant x' = x - x^3 + u with feedback k(x) = -2x and
// growth envelope 1 + s^2.
NonlinearSystem cubic_system();

// Hand-derived certificates for the cubic plant (checked by the sampled
// validators in the tests):
//   energy 1 + x^2, rate 1/2, input gain 2 s^2
//   Lyapunov x^2 with decay 2 V, quadratic regime of radius 1.
// `sample_period` sizes the one-period reach envelope; pass 0 (the default)
// to reuse the full-horizon envelope, which is valid whenever the sampling
// period does not exceed the horizon.
CompletenessCertificate cubic_completeness(double horizon, double sample_period = 0.0);
FeedbackCertificate cubic_feedback(double sample_period);

// Scalar benchmark linear plant x' = x + u(t - 1) with gain -p.
LinearSystem benchmark_linear(double p);

// Accuracy demand for running the certified predictor at practical grid
// sizes: scale * s, floored at the certified bound attainable with
// grid_budget cells, slightly inflated so the sized grid stays within budget.
AccuracyFn practical_accuracy(const BoundsPack& pack, double scale,
                              double grid_budget);

}  // namespace predfb
