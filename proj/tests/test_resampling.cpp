#include <catch_amalgamated.hpp>

#include <boost/math/distributions/students_t.hpp>
#include <map>
#include <random>
#include <set>

#include "permfdp/error.hpp"
#include "permfdp/resampling.hpp"
#include "permfdp/rng.hpp"

using namespace permfdp;

namespace {

// Two-sided pooled t-test via the Student-t distribution.
double reference_t_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  const double ma = mean(a), mb = mean(b);
  double ss = 0;
  for (double x : a) ss += (x - ma) * (x - ma);
  for (double x : b) ss += (x - mb) * (x - mb);
  const double df = a.size() + b.size() - 2.0;
  const double sp2 = ss / df;
  const double t = (ma - mb) / std::sqrt(sp2 * (1.0 / a.size() + 1.0 / b.size()));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

Matrix<double> normal_data(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix<double> x(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) x(r, c) = z(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("transform draws") {
  TransformationGroupSpec spec{SignFlip{3}, true, 4, 9};
  const auto g = draw_transforms(spec);
  REQUIRE(g.size() == 4);
  CHECK(is_identity(g[0]));
  CHECK(draw_transforms(spec).size() == 4);

  spec.w = 1;
  CHECK_THROWS_AS(draw_transforms(spec), ConfigError);

  SECTION("without replacement exhausts a small group") {
    TransformationGroupSpec all{SignFlip{2}, false, 4, 1};
    const auto t = draw_transforms(all);
    std::set<std::vector<signed char>> seen;
    for (std::size_t j = 1; j < t.size(); ++j) {
      CHECK_FALSE(is_identity(t[j]));
      seen.insert(std::get<SignPattern>(t[j]).signs);
    }
    CHECK(seen.size() == 3);
    all.w = 5;
    CHECK_THROWS_AS(draw_transforms(all), ConfigError);
  }

  SECTION("without replacement from a large group has no repeats") {
    TransformationGroupSpec big{TwoSampleLabelPermutation{5, 5}, false, 200, 3};
    const auto t = draw_transforms(big);
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t j = 1; j < t.size(); ++j) seen.insert(std::get<RowPermutation>(t[j]).source);
    CHECK(seen.size() == 199);
  }
}

TEST_CASE("sign flips are uniform over the group") {
  TransformationGroupSpec spec{SignFlip{3}, true, 8001, 42};
  const auto t = draw_transforms(spec);
  std::map<std::vector<signed char>, int> counts;
  for (std::size_t j = 1; j < t.size(); ++j) ++counts[std::get<SignPattern>(t[j]).signs];
  REQUIRE(counts.size() == 8);
  // Chi-square goodness of fit with 7 df; 24.32 is the 0.999 quantile.
  double chi2 = 0;
  for (const auto& [k, c] : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi2 < 24.32);
}

TEST_CASE("two-sample t-test") {
  SECTION("zero statistic") {
    Matrix<double> x(8, 1);
    const double col[] = {1, 2, 3, 4, 1, 2, 3, 4};
    for (int r = 0; r < 8; ++r) x(r, 0) = col[r];
    const std::vector<int> labels{1, 1, 1, 1, 0, 0, 0, 0};
    CHECK(two_sample_t_pvalues(x, labels).pvalues[0] == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("near-separated groups give tiny p-values") {
    Matrix<double> x(6, 1);
    const double col[] = {0, 1e-3, -1e-3, 1, 1 + 1e-3, 1 - 1e-3};
    for (int r = 0; r < 6; ++r) x(r, 0) = col[r];
    const std::vector<int> labels{1, 1, 1, 0, 0, 0};
    const double p = two_sample_t_pvalues(x, labels).pvalues[0];
    CHECK(p < 1e-8);
    CHECK(p == Catch::Approx(reference_t_pvalue({0, 1e-3, -1e-3}, {1, 1 + 1e-3, 1 - 1e-3}))
                   .epsilon(1e-8));
  }
  SECTION("constant column is flagged, not an error") {
    Matrix<double> x(4, 2, 3.0);
    x(0, 1) = 1.0;
    const auto out = two_sample_t_pvalues(x, std::vector<int>{1, 1, 0, 0});
    CHECK(out.pvalues[0] == 1.0);
    CHECK(out.degenerate_columns == 1);
  }
  SECTION("agrees with the Student-t reference") {
    std::mt19937_64 rng(1);
    const auto x = normal_data(rng, 20, 30);
    std::vector<int> labels(20, 0);
    for (int r = 0; r < 10; ++r) labels[r] = 1;
    const auto out = two_sample_t_pvalues(x, labels);
    for (std::size_t c = 0; c < 30; ++c) {
      std::vector<double> a, b;
      for (std::size_t r = 0; r < 20; ++r) (labels[r] ? a : b).push_back(x(r, c));
      REQUIRE(out.pvalues[c] == Catch::Approx(reference_t_pvalue(a, b)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(two_sample_t_pvalues(Matrix<double>(3, 1), std::vector<int>{1, 0, 0}),
                  DataError);
}

TEST_CASE("one-sample t-test") {
  std::mt19937_64 rng(2);
  const auto x = normal_data(rng, 12, 5);
  const auto out = one_sample_t_pvalues(x);
  for (std::size_t c = 0; c < 5; ++c) {
    double s = 0, ss = 0;
    for (std::size_t r = 0; r < 12; ++r) s += x(r, c);
    const double mean = s / 12;
    for (std::size_t r = 0; r < 12; ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double t = mean / std::sqrt(ss / 11 / 12);
    boost::math::students_t dist(11);
    const double want = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    REQUIRE(out.pvalues[c] == Catch::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("build_matrix") {
  std::mt19937_64 rng(3);
  const auto x = normal_data(rng, 20, 7);
  std::vector<int> labels(20, 0);
  for (int r = 0; r < 10; ++r) labels[r] = 1;
  TransformationGroupSpec spec{TwoSampleLabelPermutation{10, 10}, true, 50, 5};

  const auto pv = build_matrix(x, labels, spec, TestKind::TwoSampleT, 1);
  const auto direct = two_sample_t_pvalues(x, labels).pvalues;
  for (std::size_t c = 0; c < 7; ++c) REQUIRE(pv(0, c) == direct[c]);

  SECTION("deterministic and thread independent") {
    CHECK(build_matrix(x, labels, spec, TestKind::TwoSampleT, 4) == pv);
    CHECK(build_matrix(x, labels, spec, TestKind::TwoSampleT, 1) == pv);
    spec.seed = 6;
    CHECK_FALSE(build_matrix(x, labels, spec, TestKind::TwoSampleT, 1) == pv);
  }
  SECTION("w = 2") {
    spec.w = 2;
    const auto small = build_matrix(x, labels, spec, TestKind::TwoSampleT, 1);
    CHECK(small.w() == 2);
    for (std::size_t c = 0; c < 7; ++c) REQUIRE(small(0, c) == direct[c]);
  }
  SECTION("dimension checks") {
    CHECK_THROWS_AS(build_matrix(x, std::vector<int>(19, 0), spec, TestKind::TwoSampleT),
                    DataError);
    TransformationGroupSpec wrong{TwoSampleLabelPermutation{8, 12}, true, 10, 1};
    CHECK_THROWS_AS(build_matrix(x, labels, wrong, TestKind::TwoSampleT), DataError);
  }
  SECTION("sign flips with the one-sample test") {
    TransformationGroupSpec flips{SignFlip{20}, true, 30, 2};
    const auto m = build_matrix(x, {}, flips, TestKind::OneSampleT, 2);
    const auto d1 = one_sample_t_pvalues(x).pvalues;
    for (std::size_t c = 0; c < 7; ++c) REQUIRE(m(0, c) == d1[c]);
  }
}

TEST_CASE("restricted curves") {
  Matrix<double> v(2, 3);
  v(0, 0) = 0.2;
  v(0, 1) = 0.4;
  v(0, 2) = 0.9;
  v(1, 0) = 0.5;
  v(1, 1) = 0.1;
  v(1, 2) = 0.3;
  const PermutationPValueMatrix pv(v);
  CHECK(restricted_curve(pv, std::vector<std::size_t>{}, 0)(1.0) == 0);
  CHECK(restricted_curve(pv, std::vector<std::size_t>{0, 1}, 0)(0.3) == 1);
  const auto all = restricted_curve(pv, all_columns(3), 0);
  CHECK(all(0.5) == 2);
  CHECK_THROWS_AS(restricted_curve(pv, std::vector<std::size_t>{3}, 0), ConfigError);
  CHECK_THROWS_AS(restricted_curve(pv, std::vector<std::size_t>{0}, 2), ConfigError);

  // Disjoint union of index sets unions the jump multisets.
  const auto a = restricted_curve(pv, std::vector<std::size_t>{0}, 1);
  const auto b = restricted_curve(pv, std::vector<std::size_t>{1, 2}, 1);
  const auto ab = restricted_curve(pv, std::vector<std::size_t>{2, 0, 1}, 1);
  std::vector<double> merged(a.jump_points().begin(), a.jump_points().end());
  merged.insert(merged.end(), b.jump_points().begin(), b.jump_points().end());
  std::sort(merged.begin(), merged.end());
  CHECK(std::vector<double>(ab.jump_points().begin(), ab.jump_points().end()) == merged);
}

TEST_CASE("p-value matrix validation") {
  CHECK_THROWS_AS(PermutationPValueMatrix(Matrix<double>(1, 3, 0.5)), DataError);
  Matrix<double> bad(2, 2, 0.5);
  bad(1, 1) = 1.5;
  CHECK_THROWS_AS(PermutationPValueMatrix(bad), DataError);
}

TEST_CASE("rows are exchangeable under a complete null") {
  // The rank of the identity row's min-p among all rows is uniform on 1..w.
  const std::size_t w = 10;
  const int reps = 1000;
  std::vector<int> counts(w, 0);
  std::mt19937_64 rng(77);
  std::vector<int> labels(20, 0);
  for (int r = 0; r < 10; ++r) labels[r] = 1;
  for (int rep = 0; rep < reps; ++rep) {
    const auto x = normal_data(rng, 20, 5);
    TransformationGroupSpec spec{TwoSampleLabelPermutation{10, 10}, true, w,
                                 static_cast<std::uint64_t>(rep)};
    const auto pv = build_matrix(x, labels, spec, TestKind::TwoSampleT);
    std::vector<double> mins(w);
    for (std::size_t j = 0; j < w; ++j) {
      auto row = pv.row(j);
      mins[j] = *std::min_element(row.begin(), row.end());
    }
    std::size_t rank = 0;
    for (std::size_t j = 1; j < w; ++j) rank += mins[j] < mins[0];
    ++counts[rank];
  }
  double chi2 = 0;
  const double expected = static_cast<double>(reps) / w;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 0.99 quantile of chi-square with 9 df.
  CHECK(chi2 < 21.67);
}

TEST_CASE("sign-flip rows are exchangeable under symmetric null data") {
  const std::size_t w = 10;
  const int reps = 1000;
  std::vector<int> counts(w, 0);
  std::mt19937_64 rng(78);
  for (int rep = 0; rep < reps; ++rep) {
    const auto x = normal_data(rng, 12, 4);
    TransformationGroupSpec spec{SignFlip{12}, true, w, static_cast<std::uint64_t>(rep)};
    const auto pv = build_matrix(x, {}, spec, TestKind::OneSampleT);
    std::vector<double> mins(w);
    for (std::size_t j = 0; j < w; ++j) {
      auto row = pv.row(j);
      mins[j] = *std::min_element(row.begin(), row.end());
    }
    std::size_t rank = 0;
    for (std::size_t j = 1; j < w; ++j) rank += mins[j] < mins[0];
    ++counts[rank];
  }
  double chi2 = 0;
  const double expected = static_cast<double>(reps) / w;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 21.67);
}
