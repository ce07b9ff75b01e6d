#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "permfdp/error.hpp"
#include "permfdp/simulation.hpp"

using namespace permfdp;

TEST_CASE("scenario parameters") {
  SimScenario s;
  CHECK(s.abs_rho() == 0.0);
  s.sigma_z = 1.0;
  CHECK(s.abs_rho() == Catch::Approx(0.5));
  CHECK(SimScenario::sigma_for_rho(0.5) == Catch::Approx(1.0));
  CHECK(SimScenario::sigma_for_rho(0.0) == 0.0);
  CHECK(s.false_nulls() == 10);
  s.pi0 = 1.0;
  CHECK(s.false_nulls() == 0);

  SimScenario bad;
  bad.n_rows = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SimScenario{};
  bad.pi0 = 1.2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SimScenario{};
  bad.w = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(SimScenario::sigma_for_rho(1.0), ConfigError);

  CHECK(parse_method("approx") == Method::Approximate);
  CHECK(to_string(Method::Iterative) == "iterative");
  CHECK_THROWS_AS(parse_method("bogus"), ConfigError);
}

TEST_CASE("generated data has the requested structure") {
  SimScenario s;
  s.m = 40;
  s.n_rows = 2000;
  s.pi0 = 0.75;
  s.sigma_z = 1.0;
  const auto ds = generate_dataset(s, 5);
  REQUIRE(ds.data.rows() == 2000);
  REQUIRE(ds.data.cols() == 40);
  CHECK(ds.true_nulls.size() == 30);
  CHECK(ds.true_nulls.front() == 10);
  CHECK(std::count(ds.labels.begin(), ds.labels.end(), 1) == 1000);
  CHECK(ds.labels[0] == 1);
  CHECK(ds.labels[1999] == 0);

  auto column_stats = [&](std::size_t c, std::size_t r0, std::size_t r1) {
    double s1 = 0, s2 = 0;
    for (std::size_t r = r0; r < r1; ++r) {
      s1 += ds.data(r, c);
      s2 += ds.data(r, c) * ds.data(r, c);
    }
    const double n = static_cast<double>(r1 - r0);
    return std::pair{s1 / n, s2 / n - (s1 / n) * (s1 / n)};
  };
  // Shift only in the first half of the false-null columns.
  CHECK(column_stats(0, 0, 1000).first == Catch::Approx(1.5).margin(0.15));
  CHECK(column_stats(0, 1000, 2000).first == Catch::Approx(0.0).margin(0.15));
  CHECK(column_stats(20, 0, 1000).first == Catch::Approx(0.0).margin(0.15));
  // Variance 1 + sigma_z^2.
  CHECK(column_stats(20, 0, 2000).second == Catch::Approx(2.0).margin(0.2));

  // Correlation +-0.5, alternating in sign with the column parity.
  auto corr = [&](std::size_t a, std::size_t b) {
    const auto [ma, va] = column_stats(a, 1000, 2000);
    const auto [mb, vb] = column_stats(b, 1000, 2000);
    double c = 0;
    for (std::size_t r = 1000; r < 2000; ++r) c += (ds.data(r, a) - ma) * (ds.data(r, b) - mb);
    return c / 1000.0 / std::sqrt(va * vb);
  };
  CHECK(corr(20, 22) == Catch::Approx(0.5).margin(0.08));
  CHECK(corr(20, 21) == Catch::Approx(-0.5).margin(0.08));

  // Same seed, same data.
  CHECK(generate_dataset(s, 5).data == ds.data);
  CHECK_FALSE(generate_dataset(s, 6).data == ds.data);
}

TEST_CASE("a short scenario run") {
  SimScenario s;
  s.n_reps = 4;
  s.w = 20;
  s.seed = 9;
  const std::vector<Method> methods{Method::SingleStep, Method::Iterative, Method::Approximate};
  const AnalysisSettings settings;
  const auto res = run_scenario(s, methods, settings, 1);
  REQUIRE(res.replications.size() == 4);
  REQUIRE(res.summaries.size() == 3);
  for (const auto& rep : res.replications) {
    REQUIRE(rep.methods.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      // Iterative never exceeds single step.
      REQUIRE(rep.methods[1].fdp_bounds[k] <= rep.methods[0].fdp_bounds[k]);
      for (double b : rep.methods[0].fdp_bounds) REQUIRE((b >= 0.0 && b <= 1.0));
    }
  }
  for (const auto& summary : res.summaries) {
    REQUIRE(summary.mean_bound.size() == 3);
    REQUIRE((summary.coverage >= 0.0 && summary.coverage <= 1.0));
  }

  SECTION("thread count does not change the result") {
    const auto again = run_scenario(s, methods, settings, 3);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(again.replications[r].methods[k].fdp_bounds ==
                res.replications[r].methods[k].fdp_bounds);
      }
    }
  }

  SECTION("summaries over a prefix") {
    const auto first = summarize(res, 1);
    CHECK(first[0].mean_bound == res.replications[0].methods[0].fdp_bounds);
    CHECK_THROWS_AS(summarize(res, 5), ConfigError);
  }

  SECTION("csv") {
    std::ostringstream out;
    write_scenario_csv(out, std::span<const ScenarioResult>(&res, 1));
    const auto text = out.str();
    CHECK(text.rfind("pi0,abs_rho,cutoff,method,mean_bound,mc_se,coverage\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 3);
  }
}

TEST_CASE("scenario grids") {
  const auto t1 = table1_scenarios(10, 1);
  REQUIRE(t1.size() == 6);
  for (const auto& s : t1) CHECK(s.m == 50);
  CHECK(t1[1].abs_rho() == Catch::Approx(0.5));
  const auto t2 = table2_scenarios(10, 1);
  for (const auto& s : t2) CHECK(s.m == 1000);
  CHECK_FALSE(t1[0].seed == t1[1].seed);
}
