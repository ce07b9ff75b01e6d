#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace permfdp {

// The set of p-value cut-offs over which bounds hold simultaneously: either a
// closed interval [lo, hi] or a finite strictly increasing grid, all in [0, 1].
class ThresholdSet {
 public:
  static ThresholdSet interval(double lo, double hi);
  static ThresholdSet grid(std::vector<double> points);

  // "lo:hi" for an interval, "a,b,c" for a grid.
  static ThresholdSet parse(const std::string& text);

  bool is_interval() const noexcept { return interval_; }
  double infimum() const noexcept { return lo_; }
  double supremum() const noexcept { return hi_; }
  // Grid points; empty for an interval.
  std::span<const double> points() const noexcept { return points_; }

  bool contains(double t) const;

  // Smallest element of the set that is >= x.
  std::optional<double> first_at_or_above(double x) const;

  std::string to_string() const;

  friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;

 private:
  ThresholdSet() = default;

  bool interval_ = true;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> points_;
};

}  // namespace permfdp
