#include "predfb/input_history.hpp"

#include <algorithm>
#include <cmath>

#include "predfb/math_util.hpp"

namespace predfb {

InputHistory::InputHistory(int input_dim, double window, double max_gap)
    : dim_(input_dim), window_(window), max_gap_(max_gap) {
  if (input_dim <= 0) throw ValidationError("InputHistory: input_dim must be positive");
  if (!(window > 0.0) || !std::isfinite(window))
    throw ValidationError("InputHistory: window must be positive and finite");
  if (!(max_gap > 0.0)) throw ValidationError("InputHistory: max_gap must be positive");
}

double InputHistory::start_time() const {
  if (samples_.empty()) throw ValidationError("InputHistory: empty");
  return samples_.front().t;
}

double InputHistory::end_time() const {
  if (samples_.empty()) throw ValidationError("InputHistory: empty");
  return samples_.back().t;
}

void InputHistory::record(double t, const Vec& u) {
  if (u.size() != dim_)
    throw ValidationError("InputHistory::record: sample has dim " +
                          std::to_string(u.size()) + ", expected " + std::to_string(dim_));
  if (!std::isfinite(t) || !u.allFinite())
    throw ValidationError("InputHistory::record: non-finite sample at t=" + fmt_g17(t));
  if (!samples_.empty()) {
    double end = samples_.back().t;
    if (t < end)
      throw ValidationError("InputHistory::record: t=" + fmt_g17(t) +
                            " precedes current end " + fmt_g17(end));
    if (t == end) {
      samples_.back().u = u;  // right-continuous switch at the current instant
      return;
    }
    if (std::isfinite(max_gap_) && t - end > max_gap_ * (1.0 + 1e-9))
      throw ValidationError("InputHistory::record: gap " + fmt_g17(t - end) +
                            " from " + fmt_g17(end) + " exceeds max_gap " +
                            fmt_g17(max_gap_));
  }
  samples_.push_back({t, u});
}

std::size_t InputHistory::segment_index(double t) const {
  // Largest i with samples_[i].t <= t; caller guarantees range.
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const Sample& s) { return v < s.t; });
  if (it == samples_.begin()) throw ValidationError("InputHistory: time before start");
  return static_cast<std::size_t>(it - samples_.begin()) - 1;
}

Vec InputHistory::value(double t) const {
  if (samples_.empty()) throw ValidationError("InputHistory::value: empty");
  if (t < start_time() || t > end_time())
    throw ValidationError("InputHistory::value: t=" + fmt_g17(t) + " outside [" +
                          fmt_g17(start_time()) + ", " + fmt_g17(end_time()) + "]");
  std::size_t i = segment_index(t);
  if (i + 1 == samples_.size()) return samples_.back().u;
  const Sample& a = samples_[i];
  const Sample& b = samples_[i + 1];
  double w = (t - a.t) / (b.t - a.t);
  return (1.0 - w) * a.u + w * b.u;
}

Vec InputHistory::integral(double a, double b) const {
  if (samples_.empty()) throw ValidationError("InputHistory::integral: empty");
  if (a > b) throw ValidationError("InputHistory::integral: reversed interval");
  if (a < start_time() || b > end_time())
    throw ValidationError("InputHistory::integral: [" + fmt_g17(a) + ", " + fmt_g17(b) +
                          "] outside recorded range");
  Vec acc = Vec::Zero(dim_);
  if (a == b) return acc;
  double seg_a = a;
  Vec u_a = value(a);
  std::size_t i = segment_index(a) + 1;
  while (i < samples_.size() && samples_[i].t < b) {
    if (samples_[i].t > seg_a) {
      acc += 0.5 * (samples_[i].t - seg_a) * (u_a + samples_[i].u);
      seg_a = samples_[i].t;
      u_a = samples_[i].u;
    }
    ++i;
  }
  Vec u_b = value(b);
  acc += 0.5 * (b - seg_a) * (u_a + u_b);
  return acc;
}

double InputHistory::sup_norm(double a, double b) const {
  if (samples_.empty()) throw ValidationError("InputHistory::sup_norm: empty");
  if (a > b) throw ValidationError("InputHistory::sup_norm: reversed interval");
  double best = std::max(value(a).norm(), value(b).norm());
  std::size_t i = segment_index(a) + 1;
  while (i < samples_.size() && samples_[i].t < b) {
    best = std::max(best, samples_[i].u.norm());
    ++i;
  }
  return best;
}

double InputHistory::sup_norm_window(double t) const {
  if (samples_.empty()) throw ValidationError("InputHistory::sup_norm_window: empty");
  const double left = t - window_;
  // Left edge inclusion is widened slightly: picking up a sample a rounding
  // error outside the window can only raise the sup, which is the safe
  // direction for every bound built on it.
  const double tol_left = 1e-9 * std::max(1.0, std::abs(left));
  if (samples_.front().t > left + tol_left)
    throw ValidationError("InputHistory::sup_norm_window: record starts at " +
                          fmt_g17(samples_.front().t) + ", after window start " +
                          fmt_g17(left));
  if (samples_.back().t < t - 1e-9 * std::max(1.0, std::abs(t)))
    throw ValidationError("InputHistory::sup_norm_window: record ends at " +
                          fmt_g17(samples_.back().t) + ", before query time " +
                          fmt_g17(t));
  double best = -1.0;
  for (const Sample& s : samples_) {
    if (s.t < left - tol_left) continue;
    if (s.t >= t) break;
    best = std::max(best, s.u.norm());
  }
  if (best < 0.0)
    throw ValidationError("InputHistory::sup_norm_window: no stored samples in [" +
                          fmt_g17(left) + ", " + fmt_g17(t) + ")");
  return best;
}

void InputHistory::evict_before(double cut) {
  if (samples_.empty()) return;
  // Keep the last sample at or before cut so interpolation at cut still works.
  while (samples_.size() >= 2 && samples_[1].t <= cut) samples_.pop_front();
}

}  // namespace predfb
