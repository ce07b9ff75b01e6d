#include "permfdp/threshold_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "permfdp/error.hpp"

namespace permfdp {
namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("cannot parse threshold value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

ThresholdSet ThresholdSet::interval(double lo, double hi) {
  if (!is_probability(lo) || !is_probability(hi) || lo > hi) {
    throw ConfigError("threshold interval must satisfy 0 <= lo <= hi <= 1");
  }
  ThresholdSet set;
  set.interval_ = true;
  set.lo_ = lo;
  set.hi_ = hi;
  return set;
}

ThresholdSet ThresholdSet::grid(std::vector<double> points) {
  if (points.empty()) throw ConfigError("threshold grid is empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!is_probability(points[i])) throw ConfigError("threshold grid values must lie in [0, 1]");
    if (i > 0 && !(points[i - 1] < points[i])) {
      throw ConfigError("threshold grid must be strictly increasing");
    }
  }
  ThresholdSet set;
  set.interval_ = false;
  set.lo_ = points.front();
  set.hi_ = points.back();
  set.points_ = std::move(points);
  return set;
}

ThresholdSet ThresholdSet::parse(const std::string& text) {
  std::string_view view(text);
  if (auto colon = view.find(':'); colon != std::string_view::npos) {
    return interval(parse_double(view.substr(0, colon)), parse_double(view.substr(colon + 1)));
  }
  std::vector<double> points;
  std::size_t start = 0;
  while (start <= view.size()) {
    auto comma = view.find(',', start);
    if (comma == std::string_view::npos) comma = view.size();
    points.push_back(parse_double(view.substr(start, comma - start)));
    start = comma + 1;
  }
  return grid(std::move(points));
}

bool ThresholdSet::contains(double t) const {
  if (interval_) return t >= lo_ && t <= hi_;
  return std::binary_search(points_.begin(), points_.end(), t);
}

std::optional<double> ThresholdSet::first_at_or_above(double x) const {
  if (interval_) {
    if (x <= lo_) return lo_;
    if (x <= hi_) return x;
    return std::nullopt;
  }
  auto it = std::lower_bound(points_.begin(), points_.end(), x);
  if (it == points_.end()) return std::nullopt;
  return *it;
}

std::string ThresholdSet::to_string() const {
  std::ostringstream out;
  out.precision(17);
  if (interval_) {
    out << lo_ << ':' << hi_;
  } else {
    for (std::size_t i = 0; i < points_.size(); ++i) out << (i ? "," : "") << points_[i];
  }
  return out.str();
}

}  // namespace permfdp
