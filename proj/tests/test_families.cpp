#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "permfdp/error.hpp"
#include "permfdp/families.hpp"

using namespace permfdp;

namespace {

oracle::Domain interval(double lo, double hi) { return {true, lo, hi, {}}; }

}  // namespace

TEST_CASE("family grammar") {
  CHECK(CandidateFamily::parse("simes", 5).name() == "simes");
  CHECK(CandidateFamily::parse("simes:shift=0.002", 5).name() == "simes:shift=0.002");
  CHECK(std::get<SimesType>(CandidateFamily::parse("simes:shift", 5).kind()).shift == 0.001);
  CHECK(CandidateFamily::parse("beta", 5).name() == "beta");
  CHECK(CandidateFamily::parse("sam:c=0.005", 5).name() == "sam:c=0.005");
  CHECK(CandidateFamily::parse("maxt", 5).name() == "maxt");
  CHECK_THROWS_AS(CandidateFamily::parse("bonferroni", 5), ConfigError);
  CHECK_THROWS_AS(CandidateFamily::parse("sam", 5), ConfigError);
  CHECK_THROWS_AS(CandidateFamily::parse("simes:delta=1", 5), ConfigError);
  CHECK_THROWS_AS(CandidateFamily::parse("simes:shift=-1", 5), ConfigError);
  CHECK_THROWS_AS(CandidateFamily::parse("maxt:x=1", 5), ConfigError);
  CHECK_THROWS_AS(CandidateFamily::parse("simes", 0), ConfigError);
}

TEST_CASE("member values") {
  const auto d = ThresholdSet::interval(0.0, 1.0);
  CHECK(CandidateFamily(SimesType{0.0}, 3).member(0.01, d).at(0.025) == 2);
  CHECK(CandidateFamily(SimesType{0.0}, 3).member_value(0.01, 0.025) == 2);

  // Beta(1, 1) is uniform.
  CHECK(beta_quantile(1.0, 1.0, 0.5) == Catch::Approx(0.5).margin(1e-11));
  // First beta quantile in closed form: 1 - (1 - lambda)^(1/m).
  CHECK(beta_quantile(1.0, 4.0, 0.1) == Catch::Approx(1.0 - std::pow(0.9, 0.25)).margin(1e-11));
  CHECK(beta_quantile(1.0, 4.0, 0.1) == Catch::Approx(0.02600).margin(5e-6));

  const CandidateFamily sam(SamIndicator{0.3}, 6);
  CHECK(sam.member(2, d).at(0.3) == 2);
  CHECK(sam.member(2, d).at(0.31) == 6);
  const CandidateFamily maxt(MaxTIndicator{}, 6);
  CHECK(maxt.member(0.2, d).at(0.19) == 0);
  CHECK(maxt.member(0.2, d).at(0.2) == 6);
  CHECK_THROWS_AS(maxt.member(1.5, d), ConfigError);
  CHECK_THROWS_AS(sam.member(2.5, d), ConfigError);
}

TEST_CASE("beta quantile inverts the incomplete beta function") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 1 + static_cast<int>(rng() % 40);
    const int i = 1 + static_cast<int>(rng() % m);
    const double lambda = u(rng);
    const double q = beta_quantile(i, m + 1.0 - i, lambda);
    REQUIRE(incomplete_beta(i, m + 1.0 - i, q) == Catch::Approx(lambda).margin(1e-9));
    REQUIRE(q == Catch::Approx(oracle::beta_quantile(i, m, lambda)).margin(1e-11));
  }
}

TEST_CASE("members are totally ordered in the documented direction") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto d = ThresholdSet::interval(0.0, 1.0);
  const int m = 10;
  std::vector<CandidateFamily> families{CandidateFamily(SimesType{0.0}, m),
                                        CandidateFamily(SimesType{0.001}, m),
                                        CandidateFamily(BetaQuantile{}, m),
                                        CandidateFamily(SamIndicator{0.4}, m),
                                        CandidateFamily(MaxTIndicator{}, m)};
  for (const auto& f : families) {
    for (int rep = 0; rep < 100; ++rep) {
      double a = u(rng), b = u(rng);
      if (std::holds_alternative<SamIndicator>(f.kind())) {
        a = std::floor(a * (m + 1));
        b = std::floor(b * (m + 1));
      }
      if (f.size_key(a) > f.size_key(b)) std::swap(a, b);
      const auto small = f.member(a, d);
      const auto large = f.member(b, d);
      REQUIRE(pointwise_leq(small, large));
    }
    REQUIRE(f.member(f.top_parameter(), d).at(0.0) == m);
  }
}

TEST_CASE("minimal dominating member examples") {
  const auto d = ThresholdSet::interval(0.0, 1.0);
  const CandidateFamily sam(SamIndicator{0.05}, 6);
  CHECK(sam.minimal_dominating_member(RejectionCurve({0.01, 0.02, 0.05, 0.3}, 6), d) == 3.0);

  const CandidateFamily maxt(MaxTIndicator{}, 2);
  CHECK(maxt.minimal_dominating_member(RejectionCurve({0.004, 0.2}), d) == 0.004);

  // Constraints lambda <= 0.03 / 1 and lambda <= 0.05 / 2; the second binds.
  const CandidateFamily simes(SimesType{0.0}, 2);
  const double lambda = simes.minimal_dominating_member(RejectionCurve({0.03, 0.05}), d);
  CHECK(lambda == Catch::Approx(0.025).margin(1e-15));
  CHECK(lambda == oracle::simes_minimal_member(2, 0.0, {0.03, 0.05}, interval(0, 1)));
  // Grid search over lambda at resolution 1e-6.
  double grid_best = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double l = k * 1e-6;
    if (dominates(RejectionCurve({0.03, 0.05}), simes.member(l, d), d)) grid_best = l;
  }
  CHECK(grid_best == Catch::Approx(0.025).margin(1e-6));

  // Nothing inside the domain: top of the parameter range.
  CHECK(simes.minimal_dominating_member(RejectionCurve({0.5, 0.7}),
                                        ThresholdSet::interval(0.0, 0.1)) == 1.0);
}

TEST_CASE("SAM cut-off must lie in the threshold set") {
  const CandidateFamily sam(SamIndicator{0.5}, 3);
  CHECK_THROWS_AS(sam.minimal_dominating_member(RejectionCurve({0.1}),
                                                ThresholdSet::interval(0.0, 0.1)),
                  ConfigError);
}

TEST_CASE("Simes-type minimal members match brute force") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const int m = 1 + static_cast<int>(rng() % 6);
    const double shift = (rep % 2) ? 0.001 : 0.0;
    double lo = u(rng) * 0.05, hi = lo + u(rng) * 0.2;
    if (rep % 7 == 0) lo = 0.0;
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& x : p) x = u(rng) * 0.3;
    std::sort(p.begin(), p.end());
    const auto d = ThresholdSet::interval(lo, hi);
    const CandidateFamily f(SimesType{shift}, m);
    const double got = f.minimal_dominating_member(RejectionCurve(p), d);
    const double want = oracle::simes_minimal_member(m, shift, p, interval(lo, hi));
    // Same member on the domain.
    const auto probes = oracle::probe_points(interval(lo, hi), p);
    for (double t : probes) {
      REQUIRE(oracle::simes(m, shift, got, t) == oracle::simes(m, shift, want, t));
    }
    REQUIRE(dominates(RejectionCurve(p), f.member(got, d), d));
  }
}

TEST_CASE("minimal members dominate and their next larger parameter does not") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto d = ThresholdSet::interval(0.001, 0.2);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 8;
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& x : p) x = u(rng) * 0.4;
    std::sort(p.begin(), p.end());
    const RejectionCurve r(p);
    for (const auto& f : {CandidateFamily(SimesType{0.001}, m), CandidateFamily(BetaQuantile{}, m),
                          CandidateFamily(MaxTIndicator{}, m)}) {
      const double lambda = f.minimal_dominating_member(r, d);
      REQUIRE(dominates(r, f.member(lambda, d), d));
      const double nudged = lambda + 1e-9;
      if (f.in_parameter_space(nudged)) {
        const bool holds = dominates(r, f.member(nudged, d), d);
        REQUIRE((!holds || f.member(nudged, d) == f.member(lambda, d)));
      }
    }
    const CandidateFamily sam(SamIndicator{0.1}, m);
    const double k = sam.minimal_dominating_member(r, d);
    REQUIRE(dominates(r, sam.member(k, d), d));
    if (k > 0) REQUIRE_FALSE(dominates(r, sam.member(k - 1, d), d));
  }
}

TEST_CASE("beta minimal member is within tolerance of the exact constraint") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto d = ThresholdSet::interval(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 1 + static_cast<int>(rng() % 10);
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& x : p) x = u(rng);
    std::sort(p.begin(), p.end());
    // Exact answer: min_r I_{p_(r)}(r, m + 1 - r).
    double exact = 1.0;
    for (int r = 1; r <= m; ++r) {
      exact = std::min(exact, boost::math::ibeta(double(r), m + 1.0 - r, p[r - 1]));
    }
    const double got = CandidateFamily(BetaQuantile{}, m).minimal_dominating_member(
        RejectionCurve(p), d);
    REQUIRE(got <= exact);
    REQUIRE(got == Catch::Approx(exact).margin(1e-8));
  }
}

TEST_CASE("restricting the threshold set never enlarges the minimal member") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 6;
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& x : p) x = u(rng) * 0.3;
    std::sort(p.begin(), p.end());
    const auto wide = ThresholdSet::interval(0.0, 0.3);
    const auto narrow = ThresholdSet::interval(0.05, 0.2);
    for (const auto& f : {CandidateFamily(SimesType{0.001}, m), CandidateFamily(BetaQuantile{}, m),
                          CandidateFamily(MaxTIndicator{}, m)}) {
      const double a = f.minimal_dominating_member(RejectionCurve(p), wide);
      const double b = f.minimal_dominating_member(RejectionCurve(p), narrow);
      REQUIRE(f.size_key(b) <= f.size_key(a));
    }
  }
}
