#include "permfdp/closed_testing.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "permfdp/error.hpp"
#include "permfdp/parallel.hpp"

namespace permfdp {
namespace {

void require_small(std::size_t m) {
  if (m < 1 || m > static_cast<std::size_t>(kMaxClosedTestingHypotheses)) {
    throw FeasibilityError("closed testing is limited to 1.." +
                           std::to_string(kMaxClosedTestingHypotheses) + " hypotheses, got " +
                           std::to_string(m));
  }
}

bool local_test(const RestrictedEnvelopes& engine, const PermutationPValueMatrix& matrix,
                SubsetMask subset) {
  const auto& cfg = engine.config();
  const auto columns = from_mask(subset);
  const double lambda = engine.parameter(index_mask(columns, matrix.m()));
  const Envelope envelope = cfg.family.member(lambda, cfg.domain);
  return !dominates(restricted_curve(matrix, columns, 0), envelope, cfg.domain);
}

}  // namespace

LocalTestTable::LocalTestTable(int m) : m_(m) {
  require_small(static_cast<std::size_t>(m));
  rejected_.assign(std::size_t{1} << m, 0);
}

void LocalTestTable::set_rejected(SubsetMask subset, bool value) {
  if (subset == 0 || subset > full()) throw ConfigError("local tests are indexed by nonempty subsets");
  rejected_[subset] = value ? 1 : 0;
}

SubsetMask to_mask(std::span<const std::size_t> index_set) {
  SubsetMask mask = 0;
  for (std::size_t i : index_set) {
    if (i >= static_cast<std::size_t>(kMaxClosedTestingHypotheses)) {
      throw ConfigError("index out of range for closed testing");
    }
    mask |= SubsetMask{1} << i;
  }
  return mask;
}

std::vector<std::size_t> from_mask(SubsetMask mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1u) out.push_back(i);
  }
  return out;
}

bool permutation_local_test(const PermutationPValueMatrix& matrix,
                            std::span<const std::size_t> index_set, const SingleStepConfig& cfg) {
  if (index_set.empty()) throw ConfigError("local tests need a nonempty index set");
  RestrictedEnvelopes engine(matrix, cfg);
  const double lambda = engine.parameter(index_mask(index_set, matrix.m()));
  const Envelope envelope = cfg.family.member(lambda, cfg.domain);
  return !dominates(restricted_curve(matrix, index_set, 0), envelope, cfg.domain);
}

LocalTestTable permutation_local_tests(const PermutationPValueMatrix& matrix,
                                       const SingleStepConfig& cfg, unsigned threads) {
  require_small(matrix.m());
  LocalTestTable table(static_cast<int>(matrix.m()));
  RestrictedEnvelopes engine(matrix, cfg);
  std::vector<std::uint8_t> outcome(std::size_t{table.full()} + 1, 0);
  parallel_for(table.full(), threads, [&](std::size_t k) {
    const auto subset = static_cast<SubsetMask>(k + 1);
    outcome[subset] = local_test(engine, matrix, subset) ? 1 : 0;
  });
  for (SubsetMask s = 1; s <= table.full(); ++s) table.set_rejected(s, outcome[s] != 0);
  return table;
}

std::vector<std::uint8_t> closure(const LocalTestTable& table) {
  const SubsetMask full = table.full();
  std::vector<std::uint8_t> closed(std::size_t{full} + 1, 0);
  // Supersets have larger mask values, so a descending sweep sees them first.
  for (SubsetMask s = full; s >= 1; --s) {
    bool all = table.rejected(s);
    for (int i = 0; all && i < table.m(); ++i) {
      const SubsetMask bit = SubsetMask{1} << i;
      if (!(s & bit)) all = closed[s | bit] != 0;
    }
    closed[s] = all ? 1 : 0;
  }
  return closed;
}

int vbar_gw(const LocalTestTable& table, SubsetMask k) {
  int best = 0;
  for (SubsetMask b = 1; b <= table.full(); ++b) {
    if (!table.rejected(b)) best = std::max(best, std::popcount(b & k));
  }
  return best;
}

int vbar_ct(std::span<const std::uint8_t> closed, SubsetMask k) {
  int best = 0;
  // Walk the nonempty submasks of k.
  for (SubsetMask i = k; i != 0; i = (i - 1) & k) {
    if (!closed[i]) best = std::max(best, std::popcount(i));
  }
  return best;
}

int vbar_ct(const LocalTestTable& table, SubsetMask k) {
  if (k > table.full()) throw ConfigError("subset outside {1..m}");
  return vbar_ct(closure(table), k);
}

Envelope ct_envelope(const PermutationPValueMatrix& matrix, const SingleStepConfig& cfg,
                     unsigned threads) {
  require_small(matrix.m());
  const auto closed = closure(permutation_local_tests(matrix, cfg, threads));
  const auto& domain = cfg.domain;
  auto observed = matrix.observed();

  auto rejected_at = [&](double t) {
    SubsetMask mask = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      if (observed[i] <= t) mask |= SubsetMask{1} << i;
    }
    return mask;
  };

  std::vector<double> events;
  if (domain.is_interval()) {
    for (double p : observed) {
      if (p > domain.infimum() && p <= domain.supremum()) events.push_back(p);
    }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
  } else {
    auto pts = domain.points();
    events.assign(pts.begin() + 1, pts.end());
  }

  const int base = vbar_ct(closed, rejected_at(domain.infimum()));
  std::vector<EnvelopeStep> steps;
  for (double t : events) steps.push_back({t, vbar_ct(closed, rejected_at(t))});
  return Envelope(domain, static_cast<int>(matrix.m()), base, steps);
}

}  // namespace permfdp
