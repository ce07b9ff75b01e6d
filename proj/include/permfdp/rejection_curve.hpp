#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace permfdp {

// t -> #{p_i <= t} for a multiset of p-values; right-continuous, nondecreasing.
class RejectionCurve {
 public:
  RejectionCurve() = default;
  // `m_total` defaults to the number of p-values.
  explicit RejectionCurve(std::vector<double> pvalues);
  RejectionCurve(std::vector<double> pvalues, std::size_t m_total);

  int operator()(double t) const;

  // Sorted ascending, with multiplicity.
  std::span<const double> jump_points() const noexcept { return jumps_; }
  std::size_t m_total() const noexcept { return m_total_; }

 private:
  std::vector<double> jumps_;
  std::size_t m_total_ = 0;
};

}  // namespace permfdp
