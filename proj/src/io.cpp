#include "permfdp/io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "permfdp/error.hpp"

namespace permfdp {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_number(double x) { return ordered_json(x).dump(); }

}  // namespace

Matrix<double> read_numeric_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (auto f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first_content) {
        first_content = false;
        cols = fields.size();
        continue;
      }
      throw DataError("line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                      " fields, found " + std::to_string(row.size()));
    }
    first_content = false;
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw DataError("input contains no data rows");
  Matrix<double> out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(r * cols), cols, out.row(r).begin());
  }
  return out;
}

PermutationPValueMatrix read_pvalue_matrix(std::istream& in) {
  return PermutationPValueMatrix(read_numeric_csv(in));
}

std::vector<int> read_labels(std::istream& in) {
  std::vector<int> labels;
  std::string token;
  char c = 0;
  auto flush = [&] {
    if (token.empty()) return;
    if (token == "0" || token == "1") {
      labels.push_back(token == "1");
    } else {
      throw DataError("labels must be 0 or 1, found '" + token + "'");
    }
    token.clear();
  };
  while (in.get(c)) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (labels.empty()) throw DataError("labels file is empty");
  return labels;
}

void ReportMeta::set_string(const std::string& key, const std::string& value) {
  fields.emplace_back(key, ordered_json(value).dump());
}

void ReportMeta::set_number(const std::string& key, double value) {
  fields.emplace_back(key, format_number(value));
}

void ReportMeta::set_integer(const std::string& key, long long value) {
  fields.emplace_back(key, std::to_string(value));
}

void ReportMeta::set_bool(const std::string& key, bool value) {
  fields.emplace_back(key, value ? "true" : "false");
}

std::string ReportMeta::raw(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return {};
}

RunReport make_run_report(ReportMeta meta, const Envelope& envelope, BoundReport report) {
  RunReport out;
  out.meta = std::move(meta);
  for (const auto& row : report.rows) out.cutoffs.push_back(row.t);
  out.envelope = envelope.curve();
  out.report = std::move(report);
  return out;
}

std::string to_json(const RunReport& report) {
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : report.meta.fields) meta[k] = ordered_json::parse(v);
  ordered_json envelope = ordered_json::array();
  for (const auto& [t, b] : report.envelope) envelope.push_back({t, b});
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.report.rows) rows.push_back({r.t, r.rejections, r.bound, r.fdp_bound});
  ordered_json doc;
  doc["meta"] = std::move(meta);
  doc["cutoffs"] = report.cutoffs;
  doc["envelope"] = std::move(envelope);
  doc["report"] = std::move(rows);
  return doc.dump(2) + "\n";
}

RunReport run_report_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  RunReport out;
  try {
    for (const auto& [k, v] : doc.at("meta").items()) out.meta.fields.emplace_back(k, v.dump());
    out.cutoffs = doc.at("cutoffs").get<std::vector<double>>();
    for (const auto& p : doc.at("envelope")) {
      out.envelope.emplace_back(p.at(0).get<double>(), p.at(1).get<int>());
    }
    for (const auto& r : doc.at("report")) {
      out.report.rows.push_back(
          {r.at(0).get<double>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<double>()});
    }
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("report has an unexpected layout: ") + e.what());
  }
  return out;
}

std::string to_csv(const BoundReport& report) {
  std::ostringstream out;
  out << "t,R,B,fdp_bound\n";
  for (const auto& r : report.rows) {
    out << format_number(r.t) << ',' << r.rejections << ',' << r.bound << ','
        << format_number(r.fdp_bound) << '\n';
  }
  return out.str();
}

int evaluate_curve(const std::vector<std::pair<double, int>>& curve, double t) {
  if (curve.empty()) throw ConfigError("empty envelope curve");
  auto it = std::upper_bound(curve.begin(), curve.end(), t,
                             [](double x, const std::pair<double, int>& p) { return x < p.first; });
  return it == curve.begin() ? curve.front().second : std::prev(it)->second;
}

}  // namespace permfdp
