#include "permfdp/rejection_curve.hpp"

#include <algorithm>

#include "permfdp/error.hpp"

namespace permfdp {

RejectionCurve::RejectionCurve(std::vector<double> pvalues) : jumps_(std::move(pvalues)) {
  std::sort(jumps_.begin(), jumps_.end());
  m_total_ = jumps_.size();
}

RejectionCurve::RejectionCurve(std::vector<double> pvalues, std::size_t m_total)
    : jumps_(std::move(pvalues)), m_total_(m_total) {
  std::sort(jumps_.begin(), jumps_.end());
  if (m_total_ < jumps_.size()) throw ConfigError("rejection curve has more jumps than hypotheses");
}

int RejectionCurve::operator()(double t) const {
  return static_cast<int>(std::upper_bound(jumps_.begin(), jumps_.end(), t) - jumps_.begin());
}

}  // namespace permfdp
