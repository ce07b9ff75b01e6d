#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "permfdp/bounds.hpp"
#include "permfdp/envelope.hpp"
#include "permfdp/resampling.hpp"

namespace permfdp {

// Subsets of {0..m-1} as bitmasks; bit i set means hypothesis i is included.
using SubsetMask = std::uint32_t;

inline constexpr int kMaxClosedTestingHypotheses = 16;

// Outcome of the local test of H_I for every nonempty I.
class LocalTestTable {
 public:
  explicit LocalTestTable(int m);  // nothing rejected

  int m() const noexcept { return m_; }
  SubsetMask full() const noexcept { return static_cast<SubsetMask>((1u << m_) - 1u); }

  bool rejected(SubsetMask subset) const { return rejected_.at(subset) != 0; }
  void set_rejected(SubsetMask subset, bool value);

 private:
  int m_;
  std::vector<std::uint8_t> rejected_;
};

// Rejects H_I iff the observed curve restricted to I exceeds B_I somewhere on T.
bool permutation_local_test(const PermutationPValueMatrix& matrix,
                            std::span<const std::size_t> index_set, const SingleStepConfig& cfg);

LocalTestTable permutation_local_tests(const PermutationPValueMatrix& matrix,
                                       const SingleStepConfig& cfg, unsigned threads = 1);

// Indicator over all masks: I is rejected by closed testing iff every J ⊇ I
// is rejected by its local test. Entry 0 (the empty set) is never rejected.
std::vector<std::uint8_t> closure(const LocalTestTable& table);

// max{#(B ∩ K) : H_B not rejected locally}, 0 if every local test rejects.
int vbar_gw(const LocalTestTable& table, SubsetMask k);

// max{#I : I ⊆ K, I not rejected by closed testing}.
int vbar_ct(const LocalTestTable& table, SubsetMask k);
int vbar_ct(std::span<const std::uint8_t> closed, SubsetMask k);

// B^ct(t) = vbar_ct(R(t)) with the permutation local tests.
Envelope ct_envelope(const PermutationPValueMatrix& matrix, const SingleStepConfig& cfg,
                     unsigned threads = 1);

SubsetMask to_mask(std::span<const std::size_t> index_set);
std::vector<std::size_t> from_mask(SubsetMask mask);

}  // namespace permfdp
