#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "permfdp/matrix.hpp"
#include "permfdp/threshold_set.hpp"

namespace permfdp {

// Data X = X' + Z with X' iid N(0, 1), the first n_rows/2 entries of the first
// F = round((1 - pi0) m) columns shifted by `effect`, and Z_{ji} = s_i Z_j with
// s_i alternating +1, -1 across columns and Z_j ~ N(0, sigma_z^2) per row.
struct SimScenario {
  std::size_t m = 50;
  std::size_t n_rows = 20;
  double pi0 = 0.8;
  double sigma_z = 0.0;
  double effect = 1.5;
  std::size_t w = 100;
  double alpha = 0.1;
  std::size_t n_reps = 1000;
  std::uint64_t seed = 0;

  // |rho| = sigma_z^2 / (1 + sigma_z^2) between any two columns.
  double abs_rho() const;
  static double sigma_for_rho(double abs_rho);
  std::size_t false_nulls() const;
  void validate() const;
};

struct Dataset {
  Matrix<double> data;
  std::vector<int> labels;               // 1 for the first n_rows/2 units
  std::vector<std::size_t> true_nulls;   // columns F..m-1
};

Dataset generate_dataset(const SimScenario& scenario, std::uint64_t rep_seed);

enum class Method { SingleStep, Iterative, Approximate };

std::string to_string(Method method);
Method parse_method(const std::string& text);

// Analysis protocol applied to every replication.
struct AnalysisSettings {
  ThresholdSet domain = ThresholdSet::interval(0.001, 0.01);
  std::string family = "simes:shift=0.001";
  std::vector<double> cutoffs{0.001, 0.005, 0.01};
  double s = 0.005;
  int max_iters = 3;
  std::size_t subset_budget = 100;
  bool improve = true;
  std::uint64_t enumeration_cap = 100'000'000;
};

struct MethodOutcome {
  std::vector<double> fdp_bounds;  // per cut-off
  bool covered = false;            // V(t) <= B(t) for all t in T
};

struct ReplicationOutcome {
  std::vector<int> rejections;          // R(t) per cut-off
  std::vector<MethodOutcome> methods;   // in the order requested
};

struct MethodSummary {
  Method method;
  std::vector<double> mean_bound;  // per cut-off
  std::vector<double> mc_se;       // standard error of the mean
  double coverage = 0.0;           // fraction of replications with simultaneous coverage
};

struct ScenarioResult {
  SimScenario scenario;
  std::vector<Method> methods;
  std::vector<double> cutoffs;
  std::vector<ReplicationOutcome> replications;
  std::vector<MethodSummary> summaries;
};

// Replications run in parallel; each draws from its own substream of
// scenario.seed, so the result does not depend on `threads`.
ScenarioResult run_scenario(const SimScenario& scenario, std::span<const Method> methods,
                            const AnalysisSettings& settings, unsigned threads = 1);

// Summaries over the first `reps` replications.
std::vector<MethodSummary> summarize(const ScenarioResult& result, std::size_t reps);

// The six (pi0, |rho|) settings with m = 50 and m = 1000 respectively.
std::vector<SimScenario> table1_scenarios(std::size_t n_reps, std::uint64_t seed);
std::vector<SimScenario> table2_scenarios(std::size_t n_reps, std::uint64_t seed);

// Rows: pi0,abs_rho,cutoff,method,mean_bound,mc_se,coverage
void write_scenario_csv(std::ostream& out, std::span<const ScenarioResult> results,
                        bool header = true);

}  // namespace permfdp
