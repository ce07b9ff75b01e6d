#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "permfdp/envelope.hpp"
#include "permfdp/families.hpp"
#include "permfdp/resampling.hpp"
#include "permfdp/threshold_set.hpp"

namespace permfdp {

struct SingleStepConfig {
  double alpha = 0.1;
  CandidateFamily family;
  ThresholdSet domain;
  // Post-process the final envelope with monotone_improve and the observed curve.
  bool improve = true;

  void validate() const;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

struct IterativeConfig {
  // Cut-offs s in the threshold set; with several, each step keeps the
  // pointwise minimum of the per-s improvements.
  std::vector<double> s;
  int max_iters = 50;
  // Present: approximation mode with this many random subsets per step.
  std::optional<std::size_t> subset_budget;
  std::uint64_t seed = 0;
  // Exact mode refuses steps with more candidate subsets than this.
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;

  void validate(const ThresholdSet& domain) const;
};

// Number of rows a member must dominate: ceil((1 - alpha) w).
std::size_t required_rows(double alpha, std::size_t w);

// Saturating binomial coefficient.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// Per-row orderings of one p-value matrix, for repeated evaluation of the
// restricted envelopes B_I under a fixed configuration.
class RestrictedEnvelopes {
 public:
  RestrictedEnvelopes(const PermutationPValueMatrix& matrix, SingleStepConfig config);

  const SingleStepConfig& config() const noexcept { return config_; }
  std::size_t w() const noexcept { return rows_.size(); }
  std::size_t m() const noexcept { return m_; }

  // Minimal dominating parameter of R_I^j for every row j; I is given as a
  // membership mask over the columns.
  std::vector<double> row_parameters(std::span<const std::uint8_t> in_set) const;

  // Parameter of B_I: the smallest member dominating required_rows() rows.
  double parameter(std::span<const std::uint8_t> in_set) const;

 private:
  struct Entry {
    double p;
    std::size_t column;
  };

  SingleStepConfig config_;
  std::size_t m_ = 0;
  std::size_t required_ = 0;
  std::vector<std::vector<Entry>> rows_;  // p <= sup T, ascending
};

std::vector<std::uint8_t> index_mask(std::span<const std::size_t> index_set, std::size_t m);

// B_I.
Envelope restricted_envelope(const PermutationPValueMatrix& matrix,
                             std::span<const std::size_t> index_set, const SingleStepConfig& cfg);

struct EnvelopeResult {
  // Family parameter of the un-improved envelope.
  double parameter;
  // The reported envelope (improved when cfg.improve).
  Envelope envelope;
  int iterations = 0;
  // Parameters B^0, B^1, ... in the order computed.
  std::vector<double> iterate_parameters;
};

// B^m = B_{1..m}.
EnvelopeResult single_step(const PermutationPValueMatrix& matrix, const SingleStepConfig& cfg);

// Exact iterative improvement of the single-step envelope.
EnvelopeResult iterative(const PermutationPValueMatrix& matrix, const SingleStepConfig& cfg,
                         const IterativeConfig& it);

// Randomized approximation of iterative(); requires it.subset_budget.
EnvelopeResult approximate_iterative(const PermutationPValueMatrix& matrix,
                                     const SingleStepConfig& cfg, const IterativeConfig& it);

// Overloads reusing precomputed row orderings of the same matrix.
EnvelopeResult single_step(const RestrictedEnvelopes& engine,
                           const PermutationPValueMatrix& matrix);
EnvelopeResult iterative(const RestrictedEnvelopes& engine, const PermutationPValueMatrix& matrix,
                         const IterativeConfig& it);
EnvelopeResult approximate_iterative(const RestrictedEnvelopes& engine,
                                     const PermutationPValueMatrix& matrix,
                                     const IterativeConfig& it);

BoundReport bound_report(const PermutationPValueMatrix& matrix, const Envelope& envelope,
                         std::span<const double> cutoffs);

}  // namespace permfdp
