#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "permfdp/rejection_curve.hpp"
#include "permfdp/threshold_set.hpp"

namespace permfdp {

// Nondecreasing thresholds c_1 <= ... <= c_k. Entries <= 0 are crossed at every t >= 0.
class CriticalVector {
 public:
  CriticalVector() = default;
  explicit CriticalVector(std::vector<double> values);  // throws ConfigError if unsorted

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

struct EnvelopeStep {
  double at;  // the envelope takes `value` for t >= at
  int value;

  friend bool operator==(const EnvelopeStep&, const EnvelopeStep&) = default;
};

// Integer-valued nondecreasing step function on a ThresholdSet, bounded by [0, cap].
//
// Stored in normal form: `base` is the value at the infimum of the domain and
// `steps` lists every point of the domain above the infimum where the value
// changes. Two envelopes on the same domain are equal as functions iff their
// normal forms are equal.
class Envelope {
 public:
  // `raw_base` is the value below every raw step; raw steps must be sorted by
  // position with nondecreasing values. Positions outside the domain are
  // folded into the normal form.
  Envelope(ThresholdSet domain, int cap, int raw_base, std::span<const EnvelopeStep> raw_steps);

  // Constant envelope.
  static Envelope constant(ThresholdSet domain, int cap, int value);

  // Value at t; t must lie in the domain (throws ConfigError otherwise).
  int at(double t) const;
  // Value of the step function at any real t (no domain check).
  int value(double t) const;

  const ThresholdSet& domain() const noexcept { return domain_; }
  int cap() const noexcept { return cap_; }
  int base() const noexcept { return base_; }
  std::span<const EnvelopeStep> steps() const noexcept { return steps_; }

  // (t, B(t)) for the infimum of the domain followed by every jump.
  std::vector<std::pair<double, int>> curve() const;

  friend bool operator==(const Envelope&, const Envelope&) = default;

 private:
  Envelope() = default;

  ThresholdSet domain_ = ThresholdSet::interval(0.0, 1.0);
  int cap_ = 0;
  int base_ = 0;
  std::vector<EnvelopeStep> steps_;
};

// Points of the domain where either envelope can change value, plus the infimum.
std::vector<double> event_points(const Envelope& a, const Envelope& b);

// a(t) <= b(t) for every t in the shared domain.
bool pointwise_leq(const Envelope& a, const Envelope& b);

// B(t) = min(#{i : c_i <= t}, m).
Envelope envelope_from_critical_vector(const CriticalVector& c, const ThresholdSet& domain, int m);

// B'(t) = R(t) - max{[R(s) - B(s)]^+ : s in T, s <= t}. Never exceeds B.
Envelope monotone_improve(const Envelope& envelope, const RejectionCurve& curve,
                          const ThresholdSet& domain);

// B(t) = min(floor(m t / alpha), m), built from the critical vector (i alpha / m).
Envelope parametric_simes_envelope(int m, double alpha, const ThresholdSet& domain);

// R(t) <= B(t) for every t in the domain.
bool dominates(const RejectionCurve& curve, const Envelope& envelope, const ThresholdSet& domain);

struct BoundRow {
  double t;
  int rejections;
  int bound;
  double fdp_bound;  // min(B/R, 1); 0 when R = 0

  friend bool operator==(const BoundRow&, const BoundRow&) = default;
};

struct BoundReport {
  std::vector<BoundRow> rows;

  friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

double fdp_bound(int rejections, int bound);

}  // namespace permfdp
