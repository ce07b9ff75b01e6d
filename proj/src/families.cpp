#include "permfdp/families.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "permfdp/error.hpp"

namespace permfdp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kBetaLambdaTolerance = 1e-12;

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double parse_value(std::string_view text, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

// Binding constraint for domination: the curve reaches `rank` at the domain
// point `t`, so the member must be at least `rank` there.
struct Constraint {
  int rank;
  double t;
};

std::vector<Constraint> constraints_of(std::span<const double> sorted_pvalues,
                                       const ThresholdSet& domain) {
  std::vector<Constraint> out;
  int rank = 0;
  for (double p : sorted_pvalues) {
    ++rank;
    auto t = domain.first_at_or_above(p);
    if (!t) break;
    out.push_back({rank, *t});
  }
  return out;
}

int simes_count(int m, double shift, double lambda, double t) {
  if (-shift > t) return 0;
  if (lambda <= 0.0) return m;
  double guess = std::floor((t + shift) / lambda);
  int n = guess >= m ? m : (guess <= 0.0 ? 0 : static_cast<int>(guess));
  while (n < m && (n + 1) * lambda - shift <= t) ++n;
  while (n > 0 && n * lambda - shift > t) --n;
  return n;
}

double simes_minimal(std::span<const Constraint> cs, int m, double shift) {
  double lambda = 1.0 + shift;
  for (const auto& c : cs) lambda = std::min(lambda, (c.t + shift) / c.rank);
  lambda = std::max(lambda, 0.0);
  // The division above is exact only up to rounding; step down until every
  // constraint holds under the same predicate that member() uses.
  for (const auto& c : cs) {
    if (c.rank > m) continue;
    while (lambda > 0.0 && c.rank * lambda - shift > c.t) {
      lambda = std::nextafter(lambda, 0.0);
    }
  }
  return lambda;
}

double beta_minimal(std::span<const Constraint> cs, int m) {
  if (cs.empty()) return 1.0;
  const double mm = m;
  std::vector<double> safe(cs.size());
  double lower = 1.0;
  double upper = 1.0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const double a = cs[k].rank;
    const double b = mm + 1.0 - a;
    // Below safe[k] the bisected quantile is guaranteed to land at or below t;
    // above the exact CDF value it is guaranteed to land above t.
    const double shifted = cs[k].t - kBetaQuantileTolerance;
    safe[k] = shifted <= 0.0 ? 0.0 : incomplete_beta(a, b, shifted);
    lower = std::min(lower, safe[k]);
    upper = std::min(upper, incomplete_beta(a, b, cs[k].t));
  }

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (safe[k] < upper) active.push_back(k);
  }
  auto holds = [&](double lambda) {
    for (std::size_t k : active) {
      const double a = cs[k].rank;
      if (beta_quantile(a, mm + 1.0 - a, lambda) > cs[k].t) return false;
    }
    return true;
  };
  while (upper - lower > kBetaLambdaTolerance) {
    const double mid = 0.5 * (lower + upper);
    if (holds(mid)) {
      lower = mid;
    } else {
      upper = mid;
    }
  }
  return lower;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double beta_quantile(double a, double b, double p) {
  if (!(a > 0.0) || !(b > 0.0) || std::isnan(p)) {
    throw std::domain_error("beta quantile: invalid shape or probability");
  }
  if (p <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kBetaQuantileTolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f = incomplete_beta(a, b, mid);
    if (!std::isfinite(f)) throw std::runtime_error("beta quantile: bisection failed to converge");
    if (f >= p) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

CandidateFamily::CandidateFamily(FamilyKind kind, int m) : kind_(kind), m_(m) {
  if (m < 1) throw ConfigError("candidate family needs m >= 1");
  if (const auto* s = std::get_if<SimesType>(&kind_)) {
    if (!(s->shift >= 0.0) || !std::isfinite(s->shift)) {
      throw ConfigError("Simes-type shift must be nonnegative");
    }
  }
  if (const auto* s = std::get_if<SamIndicator>(&kind_)) {
    if (!(s->cutoff >= 0.0 && s->cutoff <= 1.0)) {
      throw ConfigError("SAM cut-off must lie in [0, 1]");
    }
  }
}

CandidateFamily CandidateFamily::parse(std::string_view text, int m) {
  std::string_view head = text;
  std::string_view args;
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    args = text.substr(colon + 1);
  }
  auto split_arg = [&](std::string_view expected_key) -> std::pair<bool, std::string_view> {
    auto eq = args.find('=');
    std::string_view key = args.substr(0, eq);
    if (key != expected_key) {
      throw ConfigError("unknown parameter '" + std::string(key) + "' for family '" +
                        std::string(head) + "'");
    }
    if (eq == std::string_view::npos) return {false, {}};
    return {true, args.substr(eq + 1)};
  };

  if (head == "simes") {
    if (args.empty()) return CandidateFamily(SimesType{0.0}, m);
    auto [has_value, value] = split_arg("shift");
    return CandidateFamily(
        SimesType{has_value ? parse_value(value, "shift") : kDefaultSimesShift}, m);
  }
  if (head == "sam") {
    auto [has_value, value] = split_arg("c");
    if (!has_value) throw ConfigError("family 'sam' needs c=<cutoff>");
    return CandidateFamily(SamIndicator{parse_value(value, "cut-off")}, m);
  }
  if (!args.empty()) {
    throw ConfigError("family '" + std::string(head) + "' takes no parameters");
  }
  if (head == "beta") return CandidateFamily(BetaQuantile{}, m);
  if (head == "maxt") return CandidateFamily(MaxTIndicator{}, m);
  throw ConfigError("unknown family '" + std::string(text) + "'");
}

std::string CandidateFamily::name() const {
  return std::visit(
      Overloaded{
          [](const SimesType& s) {
            return s.shift == 0.0 ? std::string("simes") : "simes:shift=" + format_double(s.shift);
          },
          [](const BetaQuantile&) { return std::string("beta"); },
          [](const SamIndicator& s) { return "sam:c=" + format_double(s.cutoff); },
          [](const MaxTIndicator&) { return std::string("maxt"); },
      },
      kind_);
}

double CandidateFamily::top_parameter() const {
  return std::holds_alternative<SamIndicator>(kind_) ? static_cast<double>(m_) : 0.0;
}

bool CandidateFamily::in_parameter_space(double lambda) const {
  if (!std::isfinite(lambda) || lambda < 0.0) return false;
  return std::visit(Overloaded{
                        [&](const SimesType& s) { return lambda <= 1.0 + s.shift; },
                        [&](const BetaQuantile&) { return lambda <= 1.0; },
                        [&](const SamIndicator&) {
                          return lambda <= m_ && lambda == std::floor(lambda);
                        },
                        [&](const MaxTIndicator&) { return lambda <= 1.0; },
                    },
                    kind_);
}

void CandidateFamily::validate_domain(const ThresholdSet& domain) const {
  if (const auto* s = std::get_if<SamIndicator>(&kind_)) {
    if (!domain.contains(s->cutoff)) {
      throw ConfigError("SAM cut-off must be an element of the threshold set");
    }
  }
}

Envelope CandidateFamily::member(double lambda, const ThresholdSet& domain) const {
  if (!in_parameter_space(lambda)) throw ConfigError("family parameter out of range");
  const double hi = domain.supremum();
  return std::visit(
      Overloaded{
          [&](const SimesType& s) {
            std::vector<EnvelopeStep> steps;
            for (int i = 1; i <= m_; ++i) {
              const double c = i * lambda - s.shift;
              if (c > hi) break;
              steps.push_back({c, i});
            }
            return Envelope(domain, m_, 0, steps);
          },
          [&](const BetaQuantile&) {
            std::vector<EnvelopeStep> steps;
            for (int i = 1; i <= m_; ++i) {
              const double q = beta_quantile(i, m_ + 1.0 - i, lambda);
              if (q > hi) break;
              steps.push_back({q, i});
            }
            return Envelope(domain, m_, 0, steps);
          },
          [&](const SamIndicator& s) {
            const EnvelopeStep step{std::nextafter(s.cutoff, 2.0), m_};
            return Envelope(domain, m_, static_cast<int>(lambda), std::span(&step, 1));
          },
          [&](const MaxTIndicator&) {
            const EnvelopeStep step{lambda, m_};
            return Envelope(domain, m_, 0, std::span(&step, 1));
          },
      },
      kind_);
}

int CandidateFamily::member_value(double lambda, double t) const {
  return std::visit(Overloaded{
                        [&](const SimesType& s) { return simes_count(m_, s.shift, lambda, t); },
                        [&](const BetaQuantile&) {
                          // Largest i with q_i <= t; q_i is nondecreasing in i.
                          int lo = 0;
                          int hi = m_;
                          while (lo < hi) {
                            const int mid = lo + (hi - lo + 1) / 2;
                            if (beta_quantile(mid, m_ + 1.0 - mid, lambda) <= t) {
                              lo = mid;
                            } else {
                              hi = mid - 1;
                            }
                          }
                          return lo;
                        },
                        [&](const SamIndicator& s) {
                          return t <= s.cutoff ? static_cast<int>(lambda) : m_;
                        },
                        [&](const MaxTIndicator&) { return t >= lambda ? m_ : 0; },
                    },
                    kind_);
}

double CandidateFamily::size_key(double lambda) const {
  return std::holds_alternative<SamIndicator>(kind_) ? lambda : -lambda;
}

double CandidateFamily::minimal_dominating_member(std::span<const double> sorted_pvalues,
                                                  const ThresholdSet& domain) const {
  return std::visit(
      Overloaded{
          [&](const SimesType& s) {
            return simes_minimal(constraints_of(sorted_pvalues, domain), m_, s.shift);
          },
          [&](const BetaQuantile&) {
            return beta_minimal(constraints_of(sorted_pvalues, domain), m_);
          },
          [&](const SamIndicator& s) {
            // The binding point is the cut-off itself, which lies in the domain.
            auto below = std::upper_bound(sorted_pvalues.begin(), sorted_pvalues.end(), s.cutoff);
            return static_cast<double>(below - sorted_pvalues.begin());
          },
          [&](const MaxTIndicator&) {
            if (sorted_pvalues.empty()) return 1.0;
            auto t = domain.first_at_or_above(sorted_pvalues.front());
            return t ? *t : 1.0;
          },
      },
      kind_);
}

double CandidateFamily::minimal_dominating_member(const RejectionCurve& curve,
                                                  const ThresholdSet& domain) const {
  validate_domain(domain);
  return minimal_dominating_member(curve.jump_points(), domain);
}

}  // namespace permfdp
