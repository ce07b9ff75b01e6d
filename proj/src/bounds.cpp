#include "permfdp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "permfdp/error.hpp"
#include "permfdp/rng.hpp"

namespace permfdp {

void SingleStepConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  family.validate_domain(domain);
}

void IterativeConfig::validate(const ThresholdSet& domain) const {
  if (s.empty()) throw ConfigError("the iterative method needs at least one cut-off s");
  for (double v : s) {
    if (!domain.contains(v)) throw ConfigError("cut-off s must be an element of the threshold set");
  }
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (subset_budget && *subset_budget < 1) throw ConfigError("subset budget must be at least 1");
  if (enumeration_cap < 1) throw ConfigError("enumeration cap must be at least 1");
}

std::size_t required_rows(double alpha, std::size_t w) {
  // Number of rows allowed to escape the envelope: floor(alpha * w), with
  // products such as 0.29 * 100 = 28.999999999999996 read as integers.
  const double aw = alpha * static_cast<double>(w);
  double escapes = std::floor(aw);
  if (aw - escapes > 1.0 - 1e-9) escapes += 1.0;
  const auto allowed = static_cast<std::size_t>(escapes);
  return allowed >= w ? 1 : w - allowed;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step.
    const std::uint64_t factor = n - k + i;
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t r = result / g;
    const std::uint64_t d = i / g;
    const std::uint64_t f = factor / d;
    if (r > kMax / f) return kMax;
    result = r * f;
  }
  return result;
}

RestrictedEnvelopes::RestrictedEnvelopes(const PermutationPValueMatrix& matrix,
                                         SingleStepConfig config)
    : config_(std::move(config)), m_(matrix.m()) {
  config_.validate();
  if (config_.family.m() != static_cast<int>(m_)) {
    throw ConfigError("candidate family size does not match the number of hypotheses");
  }
  required_ = required_rows(config_.alpha, matrix.w());
  const double sup = config_.domain.supremum();
  rows_.resize(matrix.w());
  for (std::size_t j = 0; j < matrix.w(); ++j) {
    auto row = matrix.row(j);
    auto& entries = rows_[j];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] <= sup) entries.push_back({row[i], i});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.p < b.p || (a.p == b.p && a.column < b.column);
    });
  }
}

std::vector<double> RestrictedEnvelopes::row_parameters(
    std::span<const std::uint8_t> in_set) const {
  if (in_set.size() != m_) throw ConfigError("index mask has the wrong length");
  std::vector<double> params(rows_.size());
  std::vector<double> scratch;
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    scratch.clear();
    for (const auto& e : rows_[j]) {
      if (in_set[e.column]) scratch.push_back(e.p);
    }
    params[j] = config_.family.minimal_dominating_member(scratch, config_.domain);
  }
  return params;
}

double RestrictedEnvelopes::parameter(std::span<const std::uint8_t> in_set) const {
  std::vector<double> params = row_parameters(in_set);
  // The member dominating exactly the rows whose own minimal member is no
  // larger: the required_-th smallest row member.
  const auto& family = config_.family;
  auto nth = params.begin() + static_cast<std::ptrdiff_t>(required_ - 1);
  std::nth_element(params.begin(), nth, params.end(), [&](double a, double b) {
    return family.size_key(a) < family.size_key(b);
  });
  return *nth;
}

std::vector<std::uint8_t> index_mask(std::span<const std::size_t> index_set, std::size_t m) {
  std::vector<std::uint8_t> mask(m, 0);
  for (std::size_t i : index_set) {
    if (i >= m) throw ConfigError("column index out of range");
    if (mask[i]) throw ConfigError("index set contains duplicates");
    mask[i] = 1;
  }
  return mask;
}

Envelope restricted_envelope(const PermutationPValueMatrix& matrix,
                             std::span<const std::size_t> index_set,
                             const SingleStepConfig& cfg) {
  if (index_set.empty()) throw ConfigError("restricted envelope needs a nonempty index set");
  RestrictedEnvelopes engine(matrix, cfg);
  const double lambda = engine.parameter(index_mask(index_set, matrix.m()));
  return cfg.family.member(lambda, cfg.domain);
}

namespace {

Envelope finish(const RestrictedEnvelopes& engine, const PermutationPValueMatrix& matrix,
                double parameter) {
  const auto& cfg = engine.config();
  Envelope envelope = cfg.family.member(parameter, cfg.domain);
  if (!cfg.improve) return envelope;
  const RejectionCurve observed(std::vector<double>(matrix.observed().begin(),
                                                    matrix.observed().end()));
  return monotone_improve(envelope, observed, cfg.domain);
}

// Maximum of B_{K^c} over the subsets K of the rejected set R(s) of a fixed
// size, searched over the complementary choice of which `keep` rejected
// columns stay in. Subsets are visited in lexicographic order.
class SubsetMaximizer {
 public:
  SubsetMaximizer(const RestrictedEnvelopes& engine, std::vector<std::size_t> rejected,
                  std::size_t keep)
      : engine_(engine), rejected_(std::move(rejected)), keep_(keep), mask_(engine.m(), 1) {
    for (std::size_t c : rejected_) mask_[c] = 0;
  }

  // Exact maximum. The objective grows with the kept set, so a partial
  // choice completed by every remaining candidate bounds all of its
  // completions and branches that cannot beat the incumbent are pruned.
  double exhaustive() {
    best_key_ = -std::numeric_limits<double>::infinity();
    search(0, 0);
    return best_param_;
  }

  // Maximum over `draws` subsets drawn uniformly with replacement.
  double sampled(std::size_t draws, Engine& engine) {
    best_key_ = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(rejected_.size());
    for (std::size_t d = 0; d < draws; ++d) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t k = 0; k < keep_; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
        std::swap(order[k], order[pick(engine)]);
      }
      for (std::size_t k = 0; k < keep_; ++k) mask_[rejected_[order[k]]] = 1;
      consider(engine_.parameter(mask_));
      for (std::size_t k = 0; k < keep_; ++k) mask_[rejected_[order[k]]] = 0;
    }
    return best_param_;
  }

 private:
  void consider(double param) {
    const double key = engine_.config().family.size_key(param);
    if (key > best_key_) {
      best_key_ = key;
      best_param_ = param;
    }
  }

  void search(std::size_t next, std::size_t chosen) {
    const std::size_t n = rejected_.size();
    if (chosen == keep_) {
      consider(engine_.parameter(mask_));
      return;
    }
    if (n - next < keep_ - chosen) return;
    for (std::size_t k = next; k < n; ++k) mask_[rejected_[k]] = 1;
    const double bound = engine_.parameter(mask_);
    for (std::size_t k = next; k < n; ++k) mask_[rejected_[k]] = 0;
    if (n - next == keep_ - chosen) {
      consider(bound);
      return;
    }
    if (engine_.config().family.size_key(bound) <= best_key_) return;

    mask_[rejected_[next]] = 1;
    search(next + 1, chosen + 1);
    mask_[rejected_[next]] = 0;
    search(next + 1, chosen);
  }

  const RestrictedEnvelopes& engine_;
  std::vector<std::size_t> rejected_;
  std::size_t keep_;
  std::vector<std::uint8_t> mask_;
  double best_key_ = -std::numeric_limits<double>::infinity();
  double best_param_ = 0.0;
};

EnvelopeResult run_iteration(const RestrictedEnvelopes& engine,
                             const PermutationPValueMatrix& matrix, const IterativeConfig& it,
                             bool approximate) {
  const auto& cfg = engine.config();
  const auto& family = cfg.family;
  it.validate(cfg.domain);
  if (approximate && !it.subset_budget) {
    throw ConfigError("approximation mode needs a subset budget");
  }

  auto observed = matrix.observed();
  std::vector<std::vector<std::size_t>> rejected_at(it.s.size());
  for (std::size_t k = 0; k < it.s.size(); ++k) {
    for (std::size_t i = 0; i < observed.size(); ++i) {
      if (observed[i] <= it.s[k]) rejected_at[k].push_back(i);
    }
  }

  const std::vector<std::uint8_t> all(matrix.m(), 1);
  EnvelopeResult result{engine.parameter(all), Envelope::constant(cfg.domain, family.m(), 0), 0,
                        {}};
  double current = result.parameter;
  result.iterate_parameters.push_back(current);

  for (int step = 1; step <= it.max_iters; ++step) {
    double next = 0.0;
    double next_key = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < it.s.size(); ++k) {
      const auto& rejected = rejected_at[k];
      const auto bound_at_s = static_cast<std::size_t>(family.member_value(current, it.s[k]));
      const std::size_t keep = std::min(bound_at_s, rejected.size());
      const std::uint64_t subsets = binomial(rejected.size(), keep);

      SubsetMaximizer maximizer(engine, rejected, keep);
      double candidate = 0.0;
      if (approximate && *it.subset_budget < subsets) {
        Engine rng = substream(it.seed, {streams::kSubsets, static_cast<std::uint64_t>(step), k});
        candidate = maximizer.sampled(*it.subset_budget, rng);
      } else {
        if (!approximate && subsets > it.enumeration_cap) {
          throw FeasibilityError(
              "iterative step needs " + std::to_string(subsets) +
              " subsets, above the enumeration cap of " + std::to_string(it.enumeration_cap) +
              "; use the approximation method (a subset budget) instead");
        }
        candidate = maximizer.exhaustive();
      }
      if (family.size_key(candidate) < next_key) {
        next_key = family.size_key(candidate);
        next = candidate;
      }
    }

    result.iterations = step;
    result.iterate_parameters.push_back(next);
    bool converged = true;
    for (double s : it.s) {
      if (family.member_value(next, s) != family.member_value(current, s)) converged = false;
    }
    current = next;
    if (converged) break;
  }

  if (approximate) {
    result.parameter = current;
  } else {
    for (double p : result.iterate_parameters) {
      if (family.size_key(p) < family.size_key(result.parameter)) result.parameter = p;
    }
  }
  result.envelope = finish(engine, matrix, result.parameter);
  return result;
}

}  // namespace

EnvelopeResult single_step(const RestrictedEnvelopes& engine,
                           const PermutationPValueMatrix& matrix) {
  const std::vector<std::uint8_t> all(matrix.m(), 1);
  const double lambda = engine.parameter(all);
  return {lambda, finish(engine, matrix, lambda), 0, {lambda}};
}

EnvelopeResult single_step(const PermutationPValueMatrix& matrix, const SingleStepConfig& cfg) {
  return single_step(RestrictedEnvelopes(matrix, cfg), matrix);
}

EnvelopeResult iterative(const RestrictedEnvelopes& engine, const PermutationPValueMatrix& matrix,
                         const IterativeConfig& it) {
  if (it.subset_budget) {
    throw ConfigError("the exact iterative method takes no subset budget");
  }
  return run_iteration(engine, matrix, it, false);
}

EnvelopeResult iterative(const PermutationPValueMatrix& matrix, const SingleStepConfig& cfg,
                         const IterativeConfig& it) {
  return iterative(RestrictedEnvelopes(matrix, cfg), matrix, it);
}

EnvelopeResult approximate_iterative(const RestrictedEnvelopes& engine,
                                     const PermutationPValueMatrix& matrix,
                                     const IterativeConfig& it) {
  return run_iteration(engine, matrix, it, true);
}

EnvelopeResult approximate_iterative(const PermutationPValueMatrix& matrix,
                                     const SingleStepConfig& cfg, const IterativeConfig& it) {
  return approximate_iterative(RestrictedEnvelopes(matrix, cfg), matrix, it);
}

BoundReport bound_report(const PermutationPValueMatrix& matrix, const Envelope& envelope,
                         std::span<const double> cutoffs) {
  const RejectionCurve observed(std::vector<double>(matrix.observed().begin(),
                                                    matrix.observed().end()));
  BoundReport report;
  for (double t : cutoffs) {
    if (!envelope.domain().contains(t)) {
      throw ConfigError("cut-off outside the threshold set");
    }
    const int r = observed(t);
    const int b = envelope.at(t);
    report.rows.push_back({t, r, b, fdp_bound(r, b)});
  }
  return report;
}

}  // namespace permfdp
