#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "permfdp/envelope.hpp"
#include "permfdp/matrix.hpp"
#include "permfdp/resampling.hpp"

namespace permfdp {

inline constexpr const char* kToolName = "permfdp";
inline constexpr const char* kToolVersion = "0.1.0";

// Comma-separated decimals, one matrix row per line. A first line that does not
// parse as numbers is taken as a header and skipped. Blank lines are ignored.
Matrix<double> read_numeric_csv(std::istream& in);

// w x m p-values, row 1 the identity.
PermutationPValueMatrix read_pvalue_matrix(std::istream& in);

// 0/1 entries separated by commas, whitespace or newlines.
std::vector<int> read_labels(std::istream& in);

// Insertion-ordered string key/value pairs; values are kept as JSON text so
// numbers and strings both survive a round trip.
struct ReportMeta {
  std::vector<std::pair<std::string, std::string>> fields;

  void set_string(const std::string& key, const std::string& value);
  void set_number(const std::string& key, double value);
  void set_integer(const std::string& key, long long value);
  void set_bool(const std::string& key, bool value);
  // Raw JSON text of a field, or empty when absent.
  std::string raw(const std::string& key) const;

  friend bool operator==(const ReportMeta&, const ReportMeta&) = default;
};

struct RunReport {
  ReportMeta meta;
  std::vector<double> cutoffs;
  std::vector<std::pair<double, int>> envelope;  // (jump point, value), first entry at inf T
  BoundReport report;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

RunReport make_run_report(ReportMeta meta, const Envelope& envelope, BoundReport report);

std::string to_json(const RunReport& report);
RunReport run_report_from_json(const std::string& text);

// Lossy export: t,R,B,fdp_bound.
std::string to_csv(const BoundReport& report);

// Value of a saved envelope curve at t (the curve is right-continuous with
// closed steps).
int evaluate_curve(const std::vector<std::pair<double, int>>& curve, double t);

}  // namespace permfdp
