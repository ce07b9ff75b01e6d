#include "permfdp/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "permfdp/error.hpp"

namespace permfdp {
namespace {

int clamp_value(int v, int cap) { return std::clamp(v, 0, cap); }

// Value of the raw (un-normalized) step function at t.
int raw_value(int raw_base, std::span<const EnvelopeStep> raw_steps, double t) {
  auto it = std::upper_bound(raw_steps.begin(), raw_steps.end(), t,
                             [](double x, const EnvelopeStep& s) { return x < s.at; });
  return it == raw_steps.begin() ? raw_base : std::prev(it)->value;
}

void require_same_domain(const ThresholdSet& a, const ThresholdSet& b) {
  if (!(a == b)) throw ConfigError("envelope and threshold set have different domains");
}

}  // namespace

CriticalVector::CriticalVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] < values_[i - 1]) throw ConfigError("critical vector must be sorted");
  }
}

Envelope::Envelope(ThresholdSet domain, int cap, int raw_base,
                   std::span<const EnvelopeStep> raw_steps)
    : domain_(std::move(domain)), cap_(cap) {
  if (cap < 0) throw ConfigError("envelope cap must be nonnegative");
  for (std::size_t i = 1; i < raw_steps.size(); ++i) {
    if (raw_steps[i].at < raw_steps[i - 1].at || raw_steps[i].value < raw_steps[i - 1].value) {
      throw ConfigError("envelope steps must be sorted and nondecreasing");
    }
  }
  if (!raw_steps.empty() && raw_steps.front().value < raw_base) {
    throw ConfigError("envelope steps must not decrease below the base value");
  }

  const double lo = domain_.infimum();
  base_ = clamp_value(raw_value(raw_base, raw_steps, lo), cap_);
  int current = base_;
  auto push = [&](double at, int v) {
    v = clamp_value(v, cap_);
    if (v == current) return;
    steps_.push_back({at, v});
    current = v;
  };

  if (domain_.is_interval()) {
    const double hi = domain_.supremum();
    for (std::size_t i = 0; i < raw_steps.size(); ++i) {
      const auto& s = raw_steps[i];
      if (s.at <= lo || s.at > hi) continue;
      // Several raw steps at one position: only the last one counts.
      if (i + 1 < raw_steps.size() && raw_steps[i + 1].at == s.at) continue;
      push(s.at, s.value);
    }
  } else {
    for (double g : domain_.points().subspan(1)) push(g, raw_value(raw_base, raw_steps, g));
  }
}

Envelope Envelope::constant(ThresholdSet domain, int cap, int value) {
  return Envelope(std::move(domain), cap, value, {});
}

int Envelope::at(double t) const {
  if (!domain_.contains(t)) throw ConfigError("cut-off outside the threshold set");
  return value(t);
}

int Envelope::value(double t) const { return raw_value(base_, steps_, t); }

std::vector<std::pair<double, int>> Envelope::curve() const {
  std::vector<std::pair<double, int>> out;
  out.reserve(steps_.size() + 1);
  out.emplace_back(domain_.infimum(), base_);
  for (const auto& s : steps_) out.emplace_back(s.at, s.value);
  return out;
}

std::vector<double> event_points(const Envelope& a, const Envelope& b) {
  require_same_domain(a.domain(), b.domain());
  std::vector<double> points{a.domain().infimum()};
  for (const auto& s : a.steps()) points.push_back(s.at);
  for (const auto& s : b.steps()) points.push_back(s.at);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

bool pointwise_leq(const Envelope& a, const Envelope& b) {
  for (double t : event_points(a, b)) {
    if (a.value(t) > b.value(t)) return false;
  }
  return true;
}

Envelope envelope_from_critical_vector(const CriticalVector& c, const ThresholdSet& domain,
                                       int m) {
  if (m < 1) throw ConfigError("envelope needs m >= 1");
  std::vector<EnvelopeStep> steps;
  steps.reserve(c.size());
  int count = 0;
  for (double ci : c.values()) steps.push_back({ci, ++count});
  return Envelope(domain, m, 0, steps);
}

Envelope monotone_improve(const Envelope& envelope, const RejectionCurve& curve,
                          const ThresholdSet& domain) {
  require_same_domain(envelope.domain(), domain);

  // R - B can only reach a new running maximum where R jumps (B is
  // nondecreasing), so B' changes only at the infimum and at jumps of R.
  std::vector<double> events{domain.infimum()};
  if (domain.is_interval()) {
    for (double p : curve.jump_points()) {
      if (p > domain.infimum() && p <= domain.supremum() && p != events.back()) {
        events.push_back(p);
      }
    }
  } else {
    auto pts = domain.points();
    events.assign(pts.begin(), pts.end());
  }

  int running_max = 0;
  std::vector<EnvelopeStep> steps;
  int base = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double t = events[i];
    const int r = curve(t);
    running_max = std::max(running_max, r - envelope.value(t));
    const int improved = r - running_max;
    if (i == 0) {
      base = improved;
    } else {
      steps.push_back({t, improved});
    }
  }
  return Envelope(domain, envelope.cap(), base, steps);
}

Envelope parametric_simes_envelope(int m, double alpha, const ThresholdSet& domain) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (m < 1) throw ConfigError("envelope needs m >= 1");
  std::vector<double> c(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i) c[i - 1] = i * alpha / m;
  return envelope_from_critical_vector(CriticalVector(std::move(c)), domain, m);
}

bool dominates(const RejectionCurve& curve, const Envelope& envelope,
               const ThresholdSet& domain) {
  require_same_domain(envelope.domain(), domain);
  // Between consecutive jumps of R the curve is flat while B can only grow,
  // so it suffices to look at the infimum and the first domain point at or
  // above each jump.
  if (curve(domain.infimum()) > envelope.value(domain.infimum())) return false;
  for (double p : curve.jump_points()) {
    auto t = domain.first_at_or_above(p);
    if (!t) break;
    if (curve(*t) > envelope.value(*t)) return false;
  }
  return true;
}

double fdp_bound(int rejections, int bound) {
  if (rejections <= 0) return 0.0;
  return std::min(static_cast<double>(bound) / rejections, 1.0);
}

}  // namespace permfdp
