#pragma once

// Risk report rows: one formula's metrics (or its parse error) in a shape
// that serializes to CSV, JSON and a human table.

#include "sheetsmith/csv.hpp"
#include "sheetsmith/error.hpp"
#include "sheetsmith/formula.hpp"
#include "sheetsmith/metrics.hpp"

#include <json.hpp>

#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sheetsmith {

struct RiskReportRow {
  std::string source_id;
  std::string formula;  // canonical text when parsed, source text otherwise
  std::optional<MetricsReport> metrics;
  std::optional<std::string> parse_error;  // "<Code>: <message>"
};

inline RiskReportRow make_risk_row(std::string source_id, const std::string& source) {
  RiskReportRow row;
  row.source_id = std::move(source_id);
  try {
    FormulaAst ast = parse(source);
    row.formula = render(ast);
    row.metrics = analyze(ast);
  } catch (const Error& e) {
    row.formula = source;
    row.parse_error = e.code() + ": " + e.what();
  }
  return row;
}

inline const csv::Row& risk_report_header() {
  static const csv::Row header{"source_id",  "formula", "n1",         "n2",
                               "N1",         "N2",      "complexity", "volume",
                               "difficulty", "effort",  "miller_concepts",
                               "miller_flag", "out_of_range_flag", "parse_error"};
  return header;
}

inline csv::Row risk_report_fields(const RiskReportRow& row) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  if (!row.metrics)
    return {row.source_id, row.formula, "", "", "", "", "", "", "", "", "", "", "",
            row.parse_error.value_or("")};
  const MetricsReport& m = *row.metrics;
  return {row.source_id,
          row.formula,
          std::to_string(m.counts.distinct_operators),
          std::to_string(m.counts.distinct_operands),
          std::to_string(m.counts.total_operators),
          std::to_string(m.counts.total_operands),
          format_number(m.complexity),
          format_number(m.volume),
          format_number(m.difficulty),
          format_number(m.effort),
          std::to_string(m.miller_concepts),
          b(m.miller_flag),
          b(m.out_of_range_flag),
          ""};
}

inline nlohmann::ordered_json risk_report_json(const RiskReportRow& row) {
  nlohmann::ordered_json j;
  j["source_id"] = row.source_id;
  j["formula"] = row.formula;
  if (row.metrics) {
    const MetricsReport& m = *row.metrics;
    j["n1"] = m.counts.distinct_operators;
    j["n2"] = m.counts.distinct_operands;
    j["N1"] = m.counts.total_operators;
    j["N2"] = m.counts.total_operands;
    j["complexity"] = m.complexity;
    j["volume"] = m.volume;
    j["difficulty"] = m.difficulty;
    j["effort"] = m.effort;
    j["miller_concepts"] = m.miller_concepts;
    j["miller_flag"] = m.miller_flag;
    j["out_of_range_flag"] = m.out_of_range_flag;
    j["parse_error"] = nullptr;
  } else {
    j["parse_error"] = row.parse_error.value_or("");
  }
  return j;
}

inline void write_risk_table(std::ostream& out, const RiskReportRow& row) {
  out << "source:          " << row.source_id << '\n'
      << "formula:         " << row.formula << '\n';
  if (!row.metrics) {
    out << "parse error:     " << row.parse_error.value_or("") << '\n';
    return;
  }
  const MetricsReport& m = *row.metrics;
  std::ostringstream num;
  num << std::setprecision(6);
  auto fmt = [&](double v) {
    num.str("");
    num << v;
    return num.str();
  };
  out << "operators:       n1=" << m.counts.distinct_operators << " N1=" << m.counts.total_operators
      << '\n'
      << "operands:        n2=" << m.counts.distinct_operands << " N2=" << m.counts.total_operands
      << '\n'
      << "complexity:      " << fmt(m.complexity) << (m.out_of_range_flag ? "  [out of range]" : "")
      << '\n'
      << "volume:          " << fmt(m.volume) << '\n'
      << "difficulty:      " << fmt(m.difficulty) << '\n'
      << "effort:          " << fmt(m.effort) << '\n'
      << "miller concepts: " << m.miller_concepts
      << (m.miller_flag ? "  [exceeds threshold of 9]" : "") << '\n';
}

} // namespace sheetsmith
