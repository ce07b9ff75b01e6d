#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "permfdp/matrix.hpp"
#include "permfdp/rejection_curve.hpp"

namespace permfdp {

// Permutations of the n = a + b observation units; the test compares units
// labelled 1 (group a) against units labelled 0 (group b).
struct TwoSampleLabelPermutation {
  std::size_t group_a_size = 0;
  std::size_t group_b_size = 0;
};

// Multiplication of each of the n units by +1 or -1.
struct SignFlip {
  std::size_t n_units = 0;
};

using GroupKind = std::variant<TwoSampleLabelPermutation, SignFlip>;

struct TransformationGroupSpec {
  GroupKind kind;
  bool with_replacement = true;
  std::size_t w = 100;  // number of transforms including the identity
  std::uint64_t seed = 0;

  std::size_t n_units() const;
  void validate() const;
};

// Transformed unit i is original unit source[i].
struct RowPermutation {
  std::vector<std::size_t> source;
};

struct SignPattern {
  std::vector<signed char> signs;
};

using Transform = std::variant<RowPermutation, SignPattern>;

bool is_identity(const Transform& g);

// w transforms, the identity first. With replacement the others are uniform
// on the group; without replacement they are distinct and uniform on the
// group minus the identity.
std::vector<Transform> draw_transforms(const TransformationGroupSpec& spec);

struct TestOutput {
  std::vector<double> pvalues;
  std::size_t degenerate_columns = 0;  // constant columns, reported with p = 1
};

enum class TestKind { TwoSampleT, OneSampleT };

// Pooled-variance two-sided two-sample t-test per column of an n x m matrix.
// labels[k] in {0, 1}; both groups need at least two units.
TestOutput two_sample_t_pvalues(const Matrix<double>& data, std::span<const int> labels);

// Two-sided one-sample t-test of mean zero per column.
TestOutput one_sample_t_pvalues(const Matrix<double>& data);

// w x m matrix of p-values in [0, 1]; row 0 belongs to the identity transform.
class PermutationPValueMatrix {
 public:
  explicit PermutationPValueMatrix(Matrix<double> values);

  std::size_t w() const noexcept { return values_.rows(); }
  std::size_t m() const noexcept { return values_.cols(); }
  std::span<const double> row(std::size_t j) const { return values_.row(j); }
  std::span<const double> observed() const { return values_.row(0); }
  double operator()(std::size_t j, std::size_t i) const { return values_(j, i); }
  const Matrix<double>& values() const noexcept { return values_; }

  friend bool operator==(const PermutationPValueMatrix&, const PermutationPValueMatrix&) = default;

 private:
  Matrix<double> values_;
};

// Row j holds the test applied to g_j(data). `labels` is ignored for the
// one-sample test. Rows are computed in parallel when threads > 1; the result
// does not depend on the thread count.
PermutationPValueMatrix build_matrix(const Matrix<double>& data, std::span<const int> labels,
                                     const TransformationGroupSpec& spec, TestKind test,
                                     unsigned threads = 1);

// R_I^j: the curve of row j restricted to the columns in `index_set`.
RejectionCurve restricted_curve(const PermutationPValueMatrix& matrix,
                                std::span<const std::size_t> index_set, std::size_t j);

// All columns {0, ..., m-1}.
std::vector<std::size_t> all_columns(std::size_t m);

}  // namespace permfdp
