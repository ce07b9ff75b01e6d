// Command-line front end: bound, simulate, closed-test, families.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "permfdp/bounds.hpp"
#include "permfdp/closed_testing.hpp"
#include "permfdp/error.hpp"
#include "permfdp/io.hpp"
#include "permfdp/parallel.hpp"
#include "permfdp/simulation.hpp"

namespace {

using namespace permfdp;
using ordered_json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kFeasibility = 4 };

struct CommonOptions {
  double alpha = 0.1;
  std::string thresholds = "0.001:0.01";
  std::string family = "simes:shift=0.001";
  std::string cutoffs;
  bool no_improve = false;
  std::string output;
  std::string format = "json";
  unsigned threads = default_thread_count();
};

struct BoundOptions {
  std::string input;
  std::string data;
  std::string labels;
  std::string test = "two-sample";
  std::size_t w = 100;
  bool without_replacement = false;
  std::uint64_t seed = 0;
  std::string method = "single";
  std::string s;
  int max_iters = 50;
  std::size_t subset_budget = 0;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

struct SimulateOptions {
  std::string preset;
  std::size_t m = 50;
  double pi0 = 0.8;
  std::optional<double> sigma_z;
  std::optional<double> rho;
  std::size_t w = 100;
  std::size_t n_reps = 100;
  std::uint64_t seed = 0;
  std::string methods = "single";
  double s = 0.005;
  int max_iters = 3;
  std::size_t subset_budget = 100;
};

struct ClosedTestOptions {
  std::string input;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("cannot parse ") + what + " '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

std::vector<double> report_cutoffs(const CommonOptions& opt, const ThresholdSet& domain) {
  if (!opt.cutoffs.empty()) return parse_list(opt.cutoffs, "cut-off");
  if (!domain.is_interval()) return {domain.points().begin(), domain.points().end()};
  return {domain.infimum(), domain.supremum()};
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return in;
}

void check_format(const std::string& format) {
  if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");
}

SingleStepConfig single_step_config(const CommonOptions& opt, int m) {
  const ThresholdSet domain = ThresholdSet::parse(opt.thresholds);
  SingleStepConfig cfg{opt.alpha, CandidateFamily::parse(opt.family, m), domain, !opt.no_improve};
  cfg.validate();
  return cfg;
}

PermutationPValueMatrix load_matrix(const BoundOptions& opt, unsigned threads) {
  if (!opt.input.empty()) {
    if (!opt.data.empty()) throw ConfigError("give either --input or --data, not both");
    auto in = open_input(opt.input);
    return read_pvalue_matrix(in);
  }
  if (opt.data.empty()) throw ConfigError("missing --input (p-value matrix) or --data");
  auto data_in = open_input(opt.data);
  const Matrix<double> data = read_numeric_csv(data_in);
  TransformationGroupSpec spec;
  spec.with_replacement = !opt.without_replacement;
  spec.w = opt.w;
  spec.seed = opt.seed;
  if (opt.test == "two-sample") {
    if (opt.labels.empty()) throw ConfigError("the two-sample test needs --labels");
    auto labels_in = open_input(opt.labels);
    const std::vector<int> labels = read_labels(labels_in);
    if (labels.size() != data.rows()) {
      throw DataError("labels length " + std::to_string(labels.size()) + " does not match " +
                      std::to_string(data.rows()) + " data rows");
    }
    std::size_t na = 0;
    for (int l : labels) na += static_cast<std::size_t>(l);
    spec.kind = TwoSampleLabelPermutation{na, labels.size() - na};
    return build_matrix(data, labels, spec, TestKind::TwoSampleT, threads);
  }
  if (opt.test == "one-sample") {
    spec.kind = SignFlip{data.rows()};
    return build_matrix(data, {}, spec, TestKind::OneSampleT, threads);
  }
  throw ConfigError("unknown test '" + opt.test + "' (two-sample, one-sample)");
}

int run_bound(const CommonOptions& common, const BoundOptions& opt) {
  check_format(common.format);
  const Method method = parse_method(opt.method);
  if (method == Method::SingleStep && !opt.s.empty()) {
    throw ConfigError("--s applies only to the iterative and approx methods");
  }
  if (method != Method::SingleStep && opt.s.empty()) {
    throw ConfigError("method '" + opt.method + "' requires --s");
  }
  if (method == Method::Approximate && opt.subset_budget == 0) {
    throw ConfigError("method 'approx' requires --subset-budget");
  }

  const PermutationPValueMatrix matrix = load_matrix(opt, common.threads);
  const SingleStepConfig cfg = single_step_config(common, static_cast<int>(matrix.m()));
  const std::vector<double> cutoffs = report_cutoffs(common, cfg.domain);

  IterativeConfig it;
  if (method != Method::SingleStep) it.s = parse_list(opt.s, "s");
  it.max_iters = opt.max_iters;
  it.seed = opt.seed;
  it.enumeration_cap = opt.enumeration_cap;
  if (method == Method::Approximate) it.subset_budget = opt.subset_budget;
  if (method != Method::SingleStep) it.validate(cfg.domain);

  const RestrictedEnvelopes engine(matrix, cfg);
  EnvelopeResult result = method == Method::SingleStep ? single_step(engine, matrix)
                          : method == Method::Iterative
                              ? iterative(engine, matrix, it)
                              : approximate_iterative(engine, matrix, it);
  BoundReport report = bound_report(matrix, result.envelope, cutoffs);

  if (common.format == "csv") {
    write_output(common.output, to_csv(report));
    return kOk;
  }
  ReportMeta meta;
  meta.set_string("tool", kToolName);
  meta.set_string("version", kToolVersion);
  meta.set_string("input_mode", opt.input.empty() ? "raw:" + opt.test : "pvalue-matrix");
  meta.set_integer("seed", static_cast<long long>(opt.seed));
  meta.set_string("family", cfg.family.name());
  meta.set_string("thresholds", cfg.domain.to_string());
  meta.set_number("alpha", cfg.alpha);
  meta.set_string("method", to_string(method));
  meta.set_bool("improve", cfg.improve);
  meta.set_integer("w", static_cast<long long>(matrix.w()));
  meta.set_integer("m", static_cast<long long>(matrix.m()));
  if (method != Method::SingleStep) {
    meta.set_string("s", opt.s);
    meta.set_integer("max_iters", opt.max_iters);
  }
  if (method == Method::Approximate) {
    meta.set_integer("subset_budget", static_cast<long long>(opt.subset_budget));
  }
  meta.set_integer("iterations", result.iterations);
  meta.set_number("parameter", result.parameter);
  write_output(common.output, to_json(make_run_report(std::move(meta), result.envelope,
                                                      std::move(report))));
  return kOk;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_method(item));
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

int run_simulate(const CommonOptions& common, const SimulateOptions& opt) {
  check_format(common.format);
  AnalysisSettings settings;
  settings.domain = ThresholdSet::parse(common.thresholds);
  settings.family = common.family;
  settings.cutoffs = common.cutoffs.empty() ? std::vector<double>{0.001, 0.005, 0.01}
                                            : parse_list(common.cutoffs, "cut-off");
  settings.s = opt.s;
  settings.max_iters = opt.max_iters;
  settings.subset_budget = opt.subset_budget;
  settings.improve = !common.no_improve;
  const std::vector<Method> methods = parse_methods(opt.methods);

  std::vector<SimScenario> scenarios;
  if (opt.preset == "table1") {
    scenarios = table1_scenarios(opt.n_reps, opt.seed);
  } else if (opt.preset == "table2") {
    scenarios = table2_scenarios(opt.n_reps, opt.seed);
  } else if (opt.preset.empty()) {
    if (opt.sigma_z && opt.rho) throw ConfigError("give --sigma-z or --rho, not both");
    SimScenario s;
    s.m = opt.m;
    s.pi0 = opt.pi0;
    s.sigma_z = opt.sigma_z ? *opt.sigma_z : SimScenario::sigma_for_rho(opt.rho.value_or(0.0));
    s.w = opt.w;
    s.alpha = common.alpha;
    s.n_reps = opt.n_reps;
    s.seed = opt.seed;
    scenarios.push_back(s);
  } else {
    throw ConfigError("unknown preset '" + opt.preset + "' (table1, table2)");
  }
  for (auto& s : scenarios) {
    s.alpha = common.alpha;
    s.w = opt.w;
    s.validate();
  }

  std::vector<ScenarioResult> results;
  for (const auto& s : scenarios) results.push_back(run_scenario(s, methods, settings, common.threads));

  if (common.format == "csv") {
    std::ostringstream out;
    write_scenario_csv(out, results);
    write_output(common.output, out.str());
    return kOk;
  }
  ordered_json doc;
  doc["meta"] = {{"tool", kToolName},
                 {"version", kToolVersion},
                 {"seed", opt.seed},
                 {"family", settings.family},
                 {"thresholds", settings.domain.to_string()},
                 {"alpha", common.alpha},
                 {"improve", settings.improve},
                 {"s", settings.s},
                 {"max_iters", settings.max_iters},
                 {"subset_budget", settings.subset_budget}};
  doc["cutoffs"] = settings.cutoffs;
  ordered_json rows = ordered_json::array();
  for (const auto& r : results) {
    for (const auto& s : r.summaries) {
      rows.push_back({{"m", r.scenario.m},
                      {"pi0", r.scenario.pi0},
                      {"abs_rho", r.scenario.abs_rho()},
                      {"n_reps", r.scenario.n_reps},
                      {"method", to_string(s.method)},
                      {"mean_bound", s.mean_bound},
                      {"mc_se", s.mc_se},
                      {"coverage", s.coverage}});
    }
  }
  doc["scenarios"] = std::move(rows);
  write_output(common.output, doc.dump(2) + "\n");
  return kOk;
}

int run_closed_test(const CommonOptions& common, const ClosedTestOptions& opt) {
  if (common.format != "json") throw ConfigError("closed-test writes JSON only");
  if (opt.input.empty()) throw ConfigError("missing --input (p-value matrix)");
  auto in = open_input(opt.input);
  const PermutationPValueMatrix matrix = read_pvalue_matrix(in);
  if (matrix.m() > static_cast<std::size_t>(kMaxClosedTestingHypotheses)) {
    throw FeasibilityError("closed testing enumerates all 2^m subsets and is limited to m <= " +
                           std::to_string(kMaxClosedTestingHypotheses) + "; this matrix has m = " +
                           std::to_string(matrix.m()) +
                           ". Use 'bound' with the iterative or approx method instead.");
  }
  SingleStepConfig cfg = single_step_config(common, static_cast<int>(matrix.m()));
  const std::vector<double> cutoffs = report_cutoffs(common, cfg.domain);

  const LocalTestTable table = permutation_local_tests(matrix, cfg, common.threads);
  const auto closed = closure(table);
  std::size_t discrepancies = 0;
  for (SubsetMask k = 1; k <= table.full(); ++k) {
    if (vbar_gw(table, k) != vbar_ct(closed, k)) ++discrepancies;
  }
  const Envelope ct = ct_envelope(matrix, cfg, common.threads);
  SingleStepConfig plain = cfg;
  plain.improve = false;
  const EnvelopeResult single = single_step(matrix, plain);

  const RejectionCurve observed(
      std::vector<double>(matrix.observed().begin(), matrix.observed().end()));
  ordered_json curve_ct = ordered_json::array();
  for (const auto& [t, b] : ct.curve()) curve_ct.push_back({t, b});
  ordered_json curve_single = ordered_json::array();
  for (const auto& [t, b] : single.envelope.curve()) curve_single.push_back({t, b});
  ordered_json rows = ordered_json::array();
  for (double t : cutoffs) {
    const int r = observed(t);
    rows.push_back({t, r, ct.at(t), single.envelope.at(t)});
  }

  ordered_json doc;
  doc["meta"] = {{"tool", kToolName},          {"version", kToolVersion},
                 {"family", cfg.family.name()}, {"thresholds", cfg.domain.to_string()},
                 {"alpha", cfg.alpha},          {"w", matrix.w()},
                 {"m", matrix.m()}};
  doc["cutoffs"] = cutoffs;
  doc["ct_envelope"] = std::move(curve_ct);
  doc["single_step_envelope"] = std::move(curve_single);
  doc["report"] = std::move(rows);  // [t, R, B_ct, B_single]
  doc["subsets_checked"] = table.full();
  doc["discrepancies"] = discrepancies;
  doc["equivalence"] = discrepancies == 0;
  write_output(common.output, doc.dump(2) + "\n");
  return kOk;
}

int run_families(const CommonOptions& common) {
  const std::string text =
      "simes                 B(t) = #{i : i*lambda <= t}\n"
      "simes:shift[=d]       B(t) = #{i : i*lambda - d <= t}, d defaults to 0.001\n"
      "beta                  B(t) = #{i : Beta(i, m+1-i) lambda-quantile <= t}\n"
      "sam:c=<cutoff>        B(t) = lambda for t <= c, m above; c must lie in the threshold set\n"
      "maxt                  B(t) = 0 for t < lambda, m from lambda on\n";
  write_output(common.output, text);
  return kOk;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool analysis) {
  cmd->add_option("--alpha", opt.alpha, "Error level")->capture_default_str();
  cmd->add_option("--thresholds,-T", opt.thresholds, "Interval lo:hi or comma grid")
      ->capture_default_str();
  cmd->add_option("--family", opt.family, "Candidate family (see 'families')")
      ->capture_default_str();
  cmd->add_option("--cutoffs", opt.cutoffs, "Comma list of report cut-offs");
  if (analysis) cmd->add_flag("--no-improve", opt.no_improve, "Skip the monotone improvement");
  cmd->add_option("--output,-o", opt.output, "Output file (default stdout)");
  cmd->add_option("--format", opt.format, "json or csv")->capture_default_str();
  cmd->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous FDP confidence bounds from permutation p-values"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  CommonOptions common;
  BoundOptions bound;
  SimulateOptions sim;
  ClosedTestOptions ct;

  auto* bound_cmd = app.add_subcommand("bound", "Envelope and FDP bounds for one data set");
  add_common(bound_cmd, common, true);
  bound_cmd->add_option("--input,-i", bound.input, "w x m p-value matrix CSV, row 1 = identity");
  bound_cmd->add_option("--data", bound.data, "n x m raw data CSV");
  bound_cmd->add_option("--labels", bound.labels, "0/1 group labels, length n");
  bound_cmd->add_option("--test", bound.test, "two-sample or one-sample")->capture_default_str();
  bound_cmd->add_option("--w", bound.w, "Transforms including the identity")->capture_default_str();
  bound_cmd->add_flag("--without-replacement", bound.without_replacement);
  bound_cmd->add_option("--seed", bound.seed)->capture_default_str();
  bound_cmd->add_option("--method", bound.method, "single, iterative or approx")
      ->capture_default_str();
  bound_cmd->add_option("--s", bound.s, "Comma list of cut-offs s in T (iterative, approx)");
  bound_cmd->add_option("--max-iters", bound.max_iters)->capture_default_str();
  bound_cmd->add_option("--subset-budget", bound.subset_budget, "Random subsets per step (approx)");
  bound_cmd->add_option("--enumeration-cap", bound.enumeration_cap)->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the bounds");
  add_common(sim_cmd, common, true);
  sim_cmd->add_option("--preset", sim.preset, "table1 (m=50) or table2 (m=1000)");
  sim_cmd->add_option("--m", sim.m)->capture_default_str();
  sim_cmd->add_option("--pi0", sim.pi0)->capture_default_str();
  sim_cmd->add_option("--sigma-z", sim.sigma_z);
  sim_cmd->add_option("--rho", sim.rho, "|rho|, alternative to --sigma-z");
  sim_cmd->add_option("--w", sim.w)->capture_default_str();
  sim_cmd->add_option("--n-reps", sim.n_reps)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--methods", sim.methods, "Comma list of single, iterative, approx")
      ->capture_default_str();
  sim_cmd->add_option("--s", sim.s)->capture_default_str();
  sim_cmd->add_option("--max-iters", sim.max_iters)->capture_default_str();
  sim_cmd->add_option("--subset-budget", sim.subset_budget)->capture_default_str();

  auto* ct_cmd = app.add_subcommand("closed-test", "Brute-force closed testing, m <= 16");
  add_common(ct_cmd, common, false);
  ct_cmd->add_option("--input,-i", ct.input, "w x m p-value matrix CSV")->required();

  auto* fam_cmd = app.add_subcommand("families", "List candidate families");
  fam_cmd->add_option("--output,-o", common.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (bound_cmd->parsed()) return run_bound(common, bound);
    if (sim_cmd->parsed()) return run_simulate(common, sim);
    if (ct_cmd->parsed()) return run_closed_test(common, ct);
    if (fam_cmd->parsed()) return run_families(common);
  } catch (const FeasibilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFeasibility;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
