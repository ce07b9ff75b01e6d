#include "permfdp/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "permfdp/error.hpp"
#include "permfdp/parallel.hpp"
#include "permfdp/rng.hpp"

namespace permfdp {
namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kEnumerationLimit = 1'000'000;

std::uint64_t group_order(const GroupKind& kind, std::size_t n) {
  if (std::holds_alternative<SignFlip>(kind)) {
    return n >= 64 ? kSaturated : (std::uint64_t{1} << n);
  }
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) {
    if (f > kSaturated / k) return kSaturated;
    f *= k;
  }
  return f;
}

Transform identity_transform(const GroupKind& kind, std::size_t n) {
  if (std::holds_alternative<SignFlip>(kind)) {
    return SignPattern{std::vector<signed char>(n, 1)};
  }
  RowPermutation p;
  p.source.resize(n);
  std::iota(p.source.begin(), p.source.end(), std::size_t{0});
  return p;
}

Transform random_transform(const GroupKind& kind, std::size_t n, Engine& engine) {
  if (std::holds_alternative<SignFlip>(kind)) {
    SignPattern s;
    s.signs.resize(n);
    for (auto& sign : s.signs) sign = (engine() >> 63) ? -1 : 1;
    return s;
  }
  RowPermutation p;
  p.source.resize(n);
  std::iota(p.source.begin(), p.source.end(), std::size_t{0});
  std::shuffle(p.source.begin(), p.source.end(), engine);
  return p;
}

// Every element of the group except the identity, in a fixed order.
std::vector<Transform> enumerate_non_identity(const GroupKind& kind, std::size_t n) {
  std::vector<Transform> out;
  if (std::holds_alternative<SignFlip>(kind)) {
    const std::uint64_t order = std::uint64_t{1} << n;
    for (std::uint64_t code = 1; code < order; ++code) {
      SignPattern s;
      s.signs.resize(n);
      for (std::size_t k = 0; k < n; ++k) s.signs[k] = ((code >> k) & 1U) ? -1 : 1;
      out.emplace_back(std::move(s));
    }
    return out;
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  while (std::next_permutation(perm.begin(), perm.end())) out.push_back(RowPermutation{perm});
  return out;
}

// Per-unit code of a transform, used to detect repeated draws.
std::vector<long long> transform_key(const Transform& g) {
  if (const auto* p = std::get_if<RowPermutation>(&g)) {
    return {p->source.begin(), p->source.end()};
  }
  const auto& s = std::get<SignPattern>(g).signs;
  return {s.begin(), s.end()};
}

Matrix<double> apply_transform(const Matrix<double>& data, const Transform& g) {
  Matrix<double> out(data.rows(), data.cols());
  if (const auto* p = std::get_if<RowPermutation>(&g)) {
    for (std::size_t r = 0; r < data.rows(); ++r) {
      auto src = data.row(p->source[r]);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }
  const auto& signs = std::get<SignPattern>(g).signs;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto src = data.row(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < data.cols(); ++c) dst[c] = signs[r] * src[c];
  }
  return out;
}

// Two-sided t-test p-value written through the ratio x = SS_within / SS_total
// (equivalently df / (df + t^2)): p = I_x(df / 2, 1 / 2).
double t_pvalue(double df, double within, double total) {
  if (within <= 0.0) return 0.0;
  const double x = std::min(within / total, 1.0);
  return boost::math::ibeta(0.5 * df, 0.5, x);
}

}  // namespace

std::size_t TransformationGroupSpec::n_units() const {
  if (const auto* t = std::get_if<TwoSampleLabelPermutation>(&kind)) {
    return t->group_a_size + t->group_b_size;
  }
  return std::get<SignFlip>(kind).n_units;
}

void TransformationGroupSpec::validate() const {
  if (w < 2) throw ConfigError("w must be at least 2 (the identity plus one random transform)");
  if (const auto* t = std::get_if<TwoSampleLabelPermutation>(&kind)) {
    if (t->group_a_size < 1 || t->group_b_size < 1) {
      throw ConfigError("both groups need at least one unit");
    }
  } else if (std::get<SignFlip>(kind).n_units < 1) {
    throw ConfigError("sign-flip group needs at least one unit");
  }
  if (!with_replacement) {
    const std::uint64_t order = group_order(kind, n_units());
    if (order != kSaturated && w - 1 > order - 1) {
      throw ConfigError("cannot draw " + std::to_string(w - 1) +
                        " distinct non-identity transforms from a group of order " +
                        std::to_string(order));
    }
  }
}

bool is_identity(const Transform& g) {
  if (const auto* p = std::get_if<RowPermutation>(&g)) {
    for (std::size_t i = 0; i < p->source.size(); ++i) {
      if (p->source[i] != i) return false;
    }
    return true;
  }
  const auto& s = std::get<SignPattern>(g).signs;
  return std::all_of(s.begin(), s.end(), [](signed char v) { return v == 1; });
}

std::vector<Transform> draw_transforms(const TransformationGroupSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_units();
  std::vector<Transform> out;
  out.reserve(spec.w);
  out.push_back(identity_transform(spec.kind, n));

  if (spec.with_replacement) {
    for (std::size_t j = 1; j < spec.w; ++j) {
      Engine engine = substream(spec.seed, {streams::kTransforms, j});
      out.push_back(random_transform(spec.kind, n, engine));
    }
    return out;
  }

  Engine engine = substream(spec.seed, {streams::kTransforms, 0});
  const std::uint64_t order = group_order(spec.kind, n);
  const std::size_t wanted = spec.w - 1;
  if (order <= kEnumerationLimit && 2 * static_cast<std::uint64_t>(wanted) >= order - 1) {
    auto all = enumerate_non_identity(spec.kind, n);
    std::shuffle(all.begin(), all.end(), engine);
    all.resize(wanted);
    for (auto& g : all) out.push_back(std::move(g));
    return out;
  }
  std::set<std::vector<long long>> seen;
  while (out.size() < spec.w) {
    Transform g = random_transform(spec.kind, n, engine);
    if (is_identity(g)) continue;
    if (!seen.insert(transform_key(g)).second) continue;
    out.push_back(std::move(g));
  }
  return out;
}

TestOutput two_sample_t_pvalues(const Matrix<double>& data, std::span<const int> labels) {
  const std::size_t n = data.rows();
  if (labels.size() != n) throw DataError("labels length does not match the number of rows");
  std::size_t na = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("labels must be 0 or 1");
    na += static_cast<std::size_t>(l);
  }
  const std::size_t nb = n - na;
  if (na < 2 || nb < 2) throw DataError("each group needs at least two units");

  const double df = static_cast<double>(n) - 2.0;
  const double weight = static_cast<double>(na) * static_cast<double>(nb) / static_cast<double>(n);
  TestOutput out;
  out.pvalues.resize(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t r = 0; r < n; ++r) (labels[r] ? sum_a : sum_b) += data(r, c);
    const double mean_a = sum_a / na;
    const double mean_b = sum_b / nb;
    double within = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = data(r, c) - (labels[r] ? mean_a : mean_b);
      within += d * d;
    }
    const double diff = mean_a - mean_b;
    const double total = within + weight * diff * diff;
    if (total == 0.0) {
      out.pvalues[c] = 1.0;
      ++out.degenerate_columns;
      continue;
    }
    out.pvalues[c] = t_pvalue(df, within, total);
  }
  return out;
}

TestOutput one_sample_t_pvalues(const Matrix<double>& data) {
  const std::size_t n = data.rows();
  if (n < 2) throw DataError("one-sample test needs at least two units");
  const double df = static_cast<double>(n) - 1.0;
  TestOutput out;
  out.pvalues.resize(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += data(r, c);
    const double mean = sum / n;
    double within = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = data(r, c) - mean;
      within += d * d;
    }
    const double total = within + n * mean * mean;
    if (total == 0.0) {
      out.pvalues[c] = 1.0;
      ++out.degenerate_columns;
      continue;
    }
    out.pvalues[c] = t_pvalue(df, within, total);
  }
  return out;
}

PermutationPValueMatrix::PermutationPValueMatrix(Matrix<double> values)
    : values_(std::move(values)) {
  if (values_.rows() < 2) throw DataError("p-value matrix needs at least two rows");
  if (values_.cols() < 1) throw DataError("p-value matrix needs at least one column");
  for (double p : values_.values()) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("p-values must lie in [0, 1]");
  }
}

PermutationPValueMatrix build_matrix(const Matrix<double>& data, std::span<const int> labels,
                                     const TransformationGroupSpec& spec, TestKind test,
                                     unsigned threads) {
  spec.validate();
  if (data.rows() != spec.n_units()) {
    throw DataError("data has " + std::to_string(data.rows()) + " rows but the group acts on " +
                    std::to_string(spec.n_units()) + " units");
  }
  if (data.cols() < 1) throw DataError("data has no columns");
  if (test == TestKind::TwoSampleT) {
    if (labels.size() != data.rows()) throw DataError("labels length does not match the data");
    if (const auto* t = std::get_if<TwoSampleLabelPermutation>(&spec.kind)) {
      const auto na = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
      if (na != t->group_a_size || labels.size() - na != t->group_b_size) {
        throw DataError("label counts do not match the group sizes");
      }
    }
  }

  const auto transforms = draw_transforms(spec);
  Matrix<double> values(spec.w, data.cols());
  parallel_for(spec.w, threads, [&](std::size_t j) {
    const Matrix<double> transformed = apply_transform(data, transforms[j]);
    const TestOutput result = test == TestKind::TwoSampleT
                                  ? two_sample_t_pvalues(transformed, labels)
                                  : one_sample_t_pvalues(transformed);
    std::copy(result.pvalues.begin(), result.pvalues.end(), values.row(j).begin());
  });
  return PermutationPValueMatrix(std::move(values));
}

RejectionCurve restricted_curve(const PermutationPValueMatrix& matrix,
                                std::span<const std::size_t> index_set, std::size_t j) {
  if (j >= matrix.w()) throw ConfigError("row index out of range");
  std::vector<std::size_t> sorted(index_set.begin(), index_set.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("index set contains duplicates");
  }
  if (!sorted.empty() && sorted.back() >= matrix.m()) {
    throw ConfigError("column index out of range");
  }
  std::vector<double> p;
  p.reserve(sorted.size());
  for (std::size_t i : sorted) p.push_back(matrix(j, i));
  return RejectionCurve(std::move(p), sorted.size());
}

std::vector<std::size_t> all_columns(std::size_t m) {
  std::vector<std::size_t> cols(m);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return cols;
}

}  // namespace permfdp
