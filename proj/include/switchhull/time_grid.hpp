#pragma once

#include <utility>

#include "switchhull/errors.hpp"

namespace switchhull {

/// Uniform partition of [0, T] into m intervals I_1..I_m of length T/m.
/// Interval indices are 0-based in code: interval i covers [i*dt, (i+1)*dt].
class TimeGrid {
 public:
  TimeGrid(double horizon, int intervals) : horizon_(horizon), intervals_(intervals) {
    if (!(horizon > 0.0)) throw InvalidArgument("TimeGrid: horizon must be positive");
    if (intervals < 1) throw InvalidArgument("TimeGrid: need at least one interval");
  }

  double horizon() const noexcept { return horizon_; }
  int intervals() const noexcept { return intervals_; }
  double step() const noexcept { return horizon_ / intervals_; }

  /// Time node k in 0..m.
  double node(int k) const noexcept {
    return k == intervals_ ? horizon_ : horizon_ * static_cast<double>(k) / intervals_;
  }

  std::pair<double, double> interval(int i) const noexcept { return {node(i), node(i + 1)}; }

 private:
  double horizon_;
  int intervals_;
};

}  // namespace switchhull
