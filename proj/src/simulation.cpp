#include "permfdp/simulation.hpp"

#include <cmath>
#include <ostream>

#include "permfdp/bounds.hpp"
#include "permfdp/error.hpp"
#include "permfdp/families.hpp"
#include "permfdp/parallel.hpp"
#include "permfdp/resampling.hpp"
#include "permfdp/rng.hpp"

namespace permfdp {

double SimScenario::abs_rho() const { return sigma_z * sigma_z / (1.0 + sigma_z * sigma_z); }

double SimScenario::sigma_for_rho(double abs_rho) {
  if (!(abs_rho >= 0.0 && abs_rho < 1.0)) throw ConfigError("|rho| must lie in [0, 1)");
  return std::sqrt(abs_rho / (1.0 - abs_rho));
}

std::size_t SimScenario::false_nulls() const {
  return static_cast<std::size_t>(std::lround((1.0 - pi0) * static_cast<double>(m)));
}

void SimScenario::validate() const {
  if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw ConfigError("pi0 must lie in [0, 1]");
  if (!(sigma_z >= 0.0) || !std::isfinite(sigma_z)) throw ConfigError("sigma_z must be >= 0");
  if (m < 1) throw ConfigError("m must be at least 1");
  if (n_rows < 4) throw ConfigError("n_rows must be at least 4");
  if (w < 2) throw ConfigError("w must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (n_reps < 1) throw ConfigError("n_reps must be at least 1");
}

Dataset generate_dataset(const SimScenario& scenario, std::uint64_t rep_seed) {
  scenario.validate();
  const std::size_t n = scenario.n_rows;
  const std::size_t m = scenario.m;
  const std::size_t half = n / 2;
  const std::size_t shifted = scenario.false_nulls();

  Engine engine(rep_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset out{Matrix<double>(n, m), std::vector<int>(n, 0), {}};
  for (std::size_t r = 0; r < n; ++r) {
    const double shared = scenario.sigma_z * noise(engine);
    for (std::size_t c = 0; c < m; ++c) {
      const double sign = (c % 2 == 0) ? 1.0 : -1.0;  // column c is the (c+1)-th
      double x = noise(engine) + sign * shared;
      if (c < shifted && r < half) x += scenario.effect;
      out.data(r, c) = x;
    }
  }
  for (std::size_t r = 0; r < half; ++r) out.labels[r] = 1;
  for (std::size_t c = shifted; c < m; ++c) out.true_nulls.push_back(c);
  return out;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::SingleStep:
      return "single";
    case Method::Iterative:
      return "iterative";
    case Method::Approximate:
      return "approx";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  if (text == "single") return Method::SingleStep;
  if (text == "iterative") return Method::Iterative;
  if (text == "approx") return Method::Approximate;
  throw ConfigError("unknown method '" + text + "' (single, iterative, approx)");
}

namespace {

ReplicationOutcome run_replication(const SimScenario& scenario, std::span<const Method> methods,
                                   const AnalysisSettings& settings, std::size_t rep) {
  const Dataset ds =
      generate_dataset(scenario, derive_seed(scenario.seed, {streams::kSimulation, rep, 0}));
  const std::size_t half = scenario.n_rows / 2;
  TransformationGroupSpec group{TwoSampleLabelPermutation{half, scenario.n_rows - half}, true,
                                scenario.w,
                                derive_seed(scenario.seed, {streams::kSimulation, rep, 1})};
  const auto matrix = build_matrix(ds.data, ds.labels, group, TestKind::TwoSampleT);

  SingleStepConfig cfg{scenario.alpha,
                       CandidateFamily::parse(settings.family, static_cast<int>(scenario.m)),
                       settings.domain, settings.improve};
  const RestrictedEnvelopes engine(matrix, cfg);
  IterativeConfig it;
  it.s = {settings.s};
  it.max_iters = settings.max_iters;
  it.seed = derive_seed(scenario.seed, {streams::kSimulation, rep, 2});
  it.enumeration_cap = settings.enumeration_cap;

  const RejectionCurve observed(
      std::vector<double>(matrix.observed().begin(), matrix.observed().end()));
  const RejectionCurve false_positives = restricted_curve(matrix, ds.true_nulls, 0);

  ReplicationOutcome out;
  for (double t : settings.cutoffs) out.rejections.push_back(observed(t));
  for (Method method : methods) {
    EnvelopeResult result = [&] {
      switch (method) {
        case Method::Iterative:
          return iterative(engine, matrix, it);
        case Method::Approximate: {
          IterativeConfig approx = it;
          approx.subset_budget = settings.subset_budget;
          return approximate_iterative(engine, matrix, approx);
        }
        case Method::SingleStep:
          break;
      }
      return single_step(engine, matrix);
    }();
    MethodOutcome mo;
    for (std::size_t k = 0; k < settings.cutoffs.size(); ++k) {
      mo.fdp_bounds.push_back(
          fdp_bound(out.rejections[k], result.envelope.at(settings.cutoffs[k])));
    }
    mo.covered = dominates(false_positives, result.envelope, settings.domain);
    out.methods.push_back(std::move(mo));
  }
  return out;
}

}  // namespace

std::vector<MethodSummary> summarize(const ScenarioResult& result, std::size_t reps) {
  if (reps == 0 || reps > result.replications.size()) {
    throw ConfigError("summary needs between 1 and " +
                      std::to_string(result.replications.size()) + " replications");
  }
  std::vector<MethodSummary> out;
  const std::size_t nc = result.cutoffs.size();
  for (std::size_t mi = 0; mi < result.methods.size(); ++mi) {
    MethodSummary s{result.methods[mi], std::vector<double>(nc, 0.0),
                    std::vector<double>(nc, 0.0), 0.0};
    std::size_t covered = 0;
    for (std::size_t k = 0; k < nc; ++k) {
      double sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) sum += result.replications[r].methods[mi].fdp_bounds[k];
      const double mean = sum / reps;
      double ss = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double d = result.replications[r].methods[mi].fdp_bounds[k] - mean;
        ss += d * d;
      }
      s.mean_bound[k] = mean;
      s.mc_se[k] = reps > 1 ? std::sqrt(ss / (reps - 1) / reps) : 0.0;
    }
    for (std::size_t r = 0; r < reps; ++r) covered += result.replications[r].methods[mi].covered;
    s.coverage = static_cast<double>(covered) / reps;
    out.push_back(std::move(s));
  }
  return out;
}

ScenarioResult run_scenario(const SimScenario& scenario, std::span<const Method> methods,
                            const AnalysisSettings& settings, unsigned threads) {
  scenario.validate();
  for (double t : settings.cutoffs) {
    if (!settings.domain.contains(t)) throw ConfigError("report cut-off outside the threshold set");
  }
  ScenarioResult result{scenario, {methods.begin(), methods.end()}, settings.cutoffs, {}, {}};
  result.replications.resize(scenario.n_reps);
  parallel_for(scenario.n_reps, threads, [&](std::size_t rep) {
    result.replications[rep] = run_replication(scenario, methods, settings, rep);
  });
  result.summaries = summarize(result, scenario.n_reps);
  return result;
}

namespace {

std::vector<SimScenario> scenario_grid(std::size_t m, std::size_t n_reps, std::uint64_t seed) {
  std::vector<SimScenario> out;
  std::uint64_t index = 0;
  for (double pi0 : {0.8, 0.6, 0.4}) {
    for (double rho : {0.0, 0.5}) {
      SimScenario s;
      s.m = m;
      s.pi0 = pi0;
      s.sigma_z = SimScenario::sigma_for_rho(rho);
      s.n_reps = n_reps;
      s.seed = derive_seed(seed, {m, index++});
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

std::vector<SimScenario> table1_scenarios(std::size_t n_reps, std::uint64_t seed) {
  return scenario_grid(50, n_reps, seed);
}

std::vector<SimScenario> table2_scenarios(std::size_t n_reps, std::uint64_t seed) {
  return scenario_grid(1000, n_reps, seed);
}

void write_scenario_csv(std::ostream& out, std::span<const ScenarioResult> results, bool header) {
  if (header) out << "pi0,abs_rho,cutoff,method,mean_bound,mc_se,coverage\n";
  const auto old_precision = out.precision(10);
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.cutoffs.size(); ++k) {
      for (const auto& s : r.summaries) {
        out << r.scenario.pi0 << ',' << r.scenario.abs_rho() << ',' << r.cutoffs[k] << ','
            << to_string(s.method) << ',' << s.mean_bound[k] << ',' << s.mc_se[k] << ','
            << s.coverage << '\n';
      }
    }
  }
  out.precision(old_precision);
}

}  // namespace permfdp
