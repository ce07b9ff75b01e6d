#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "permfdp/envelope.hpp"
#include "permfdp/rejection_curve.hpp"
#include "permfdp/threshold_set.hpp"

namespace permfdp {

inline constexpr double kDefaultSimesShift = 0.001;

// B^lambda(t) = #{i : i*lambda - shift <= t}, lambda in [0, 1 + shift].
// Larger lambda gives a smaller envelope.
struct SimesType {
  double shift = 0.0;
};

// B^lambda(t) = #{i : q_i(lambda) <= t} with q_i(lambda) the lambda-quantile of
// Beta(i, m + 1 - i), lambda in [0, 1]. Larger lambda gives a smaller envelope.
struct BetaQuantile {};

// B^lambda(t) = lambda for t <= cutoff, m otherwise; lambda in {0..m}.
// Larger lambda gives a larger envelope.
struct SamIndicator {
  double cutoff = 0.0;
};

// B^lambda(t) = 0 for t < lambda, m otherwise; lambda in [0, 1].
// Larger lambda gives a smaller envelope.
struct MaxTIndicator {};

using FamilyKind = std::variant<SimesType, BetaQuantile, SamIndicator, MaxTIndicator>;

// A totally ordered, data-independent family of candidate envelopes over m hypotheses.
class CandidateFamily {
 public:
  CandidateFamily(FamilyKind kind, int m);

  // Grammar: simes | simes:shift[=<delta>] | beta | sam:c=<cutoff> | maxt
  static CandidateFamily parse(std::string_view text, int m);

  // Canonical grammar string.
  std::string name() const;

  const FamilyKind& kind() const noexcept { return kind_; }
  int m() const noexcept { return m_; }

  // Parameter of the member that is identically m.
  double top_parameter() const;
  bool in_parameter_space(double lambda) const;

  Envelope member(double lambda, const ThresholdSet& domain) const;
  // member(lambda, domain).value(t), without building the envelope.
  int member_value(double lambda, double t) const;

  // Orders parameters by envelope size: size_key(a) < size_key(b) iff member(a) < member(b).
  double size_key(double lambda) const;

  // Parameter of the smallest member B with R(t) <= B(t) on the domain, where
  // R counts the given p-values. `sorted_pvalues` must be ascending.
  double minimal_dominating_member(std::span<const double> sorted_pvalues,
                                   const ThresholdSet& domain) const;
  double minimal_dominating_member(const RejectionCurve& curve, const ThresholdSet& domain) const;

  // Checks that the family can be evaluated on `domain` (the SAM cut-off must be in it).
  void validate_domain(const ThresholdSet& domain) const;

 private:
  FamilyKind kind_;
  int m_;
};

// Bracket width used when inverting the regularized incomplete beta function.
inline constexpr double kBetaQuantileTolerance = 0x1p-40;

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Smallest x (to within kBetaQuantileTolerance, rounded up) with I_x(a, b) >= p,
// found by bisection on [0, 1]. Nondecreasing in p.
double beta_quantile(double a, double b, double p);

}  // namespace permfdp
