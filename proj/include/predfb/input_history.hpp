#pragma once

#include <deque>
#include <limits>

#include "predfb/types.hpp"

namespace predfb {

// Time-stamped input samples with piecewise-linear interpolation between them,
// attached to a lookback window of fixed length (the plant's input delay).
// Sample times are strictly increasing; recording at the current end time
// overwrites the stored value, which keeps the signal right-continuous at
// controller switch instants while interpolation up to that instant still
// uses the previously applied value.
class InputHistory {
 public:
  struct Sample {
    double t;
    Vec u;
  };

  InputHistory(int input_dim, double window,
               double max_gap = std::numeric_limits<double>::infinity());

  int dim() const { return dim_; }
  double window() const { return window_; }
  double max_gap() const { return max_gap_; }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  double start_time() const;
  double end_time() const;

  // Append a sample at time t (t >= end); t == end replaces the stored value.
  // A jump past end by more than max_gap is rejected: the stored record must
  // stay dense enough that windowed sups taken over samples are meaningful.
  void record(double t, const Vec& u);

  // Piecewise-linear value at t, start <= t <= end.
  Vec value(double t) const;

  // Exact integral of the interpolant over [a, b], start <= a <= b <= end.
  Vec integral(double a, double b) const;

  // Supremum of |u| over the closed interval [a, b]. The interpolant is
  // piecewise affine, so the norm is convex per segment and the sup is
  // attained at a breakpoint or an interval endpoint.
  double sup_norm(double a, double b) const;

  // Maximum of |u| over stored samples with time in [t - window, t), left
  // edge included up to a relative 1e-9 tolerance, right edge excluded so a
  // value recorded at the query instant never feeds back into its own bound.
  // Requires the record to cover the window: the earliest sample must lie at
  // or before t - window, the newest at or after t (within tolerance), and at
  // least one sample must fall inside; throws ValidationError otherwise.
  double sup_norm_window(double t) const;

  // Drop samples before cut, keeping the last sample at or before cut so
  // interpolation at cut remains valid.
  void evict_before(double cut);

  const std::deque<Sample>& samples() const { return samples_; }

 private:
  int dim_;
  double window_;
  double max_gap_;
  std::deque<Sample> samples_;
  std::size_t segment_index(double t) const;  // index i with t in [t_i, t_{i+1}]
};

}  // namespace predfb
