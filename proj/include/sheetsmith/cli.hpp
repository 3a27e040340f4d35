#pragma once

// Command-line front end. `run` is the whole program minus process setup so
// tests can drive it in-process with string streams.
//
// Exit status: 0 success, 1 domain error, 2 usage or file error. Every error
// path writes exactly one `error[<Code>]: <message>` line to stderr.

#include "sheetsmith/confidence.hpp"
#include "sheetsmith/csv.hpp"
#include "sheetsmith/error.hpp"
#include "sheetsmith/evaluator.hpp"
#include "sheetsmith/formula.hpp"
#include "sheetsmith/metrics.hpp"
#include "sheetsmith/report.hpp"
#include "sheetsmith/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace sheetsmith::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Raised for usage mistakes detected after option parsing.
class UsageError : public Error {
public:
  explicit UsageError(const std::string& message) : Error("Usage", message) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

/// A domain-level failure that is not an exception inside the library, such
/// as a failed validation.
class CommandFailed : public Error {
public:
  CommandFailed(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

inline int exit_code_for(const Error& e) {
  if (e.code() == "CsvError" || e.code() == "Usage" || e.code() == "IoError") return kExitUsage;
  return kExitDomain;
}

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::string utc_stamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

/// Writes a data file. With `stamp` the first line is a `# generated` comment.
inline void write_file(const std::filesystem::path& path, const std::string& body, bool stamp) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  if (stamp) f << "# generated " << utc_stamp() << '\n';
  f << body;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string csv_text(const csv::Row& header, const std::vector<csv::Row>& rows) {
  std::ostringstream s;
  csv::write_row(s, header);
  for (const auto& r : rows) csv::write_row(s, r);
  return s.str();
}

inline std::string fmt(double v) { return format_number(v); }
inline std::string fmt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

/// Number, TRUE/FALSE, or text.
inline Value infer_value(const std::string& field) {
  std::string upper;
  for (char c : field) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "TRUE") return true;
  if (upper == "FALSE") return false;
  try {
    return csv::parse_number(field, "value");
  } catch (const CsvError&) {
    return field;
  }
}

struct ExampleFile {
  std::vector<std::string> attributes;
  std::vector<csv::Row> rows;  // attribute fields then label
  std::map<std::string, CellRef> cells;  // empty unless every header is a cell
};

inline ExampleFile read_example_file(const std::string& path) {
  csv::Table t = csv::read_file(path);
  if (t.header.size() < 2 || t.header.back() != "label")
    throw CsvError(path + ": expected one column per attribute followed by a final 'label' column");
  ExampleFile f;
  f.attributes.assign(t.header.begin(), t.header.end() - 1);
  f.rows = std::move(t.rows);
  bool all_cells = true;
  for (const auto& name : f.attributes) {
    auto ref = parse_cell_ref(name);
    if (!ref) {
      all_cells = false;
      break;
    }
    f.cells[name] = CellRef{ref->column, ref->row};
  }
  if (!all_cells) f.cells.clear();
  return f;
}

inline std::vector<CellRef> example_cells(const ExampleFile& f) {
  std::vector<CellRef> cells;
  for (std::size_t i = 0; i < f.attributes.size(); ++i)
    cells.push_back(f.cells.empty() ? CellRef{static_cast<std::uint32_t>(3 + i), 5}
                                    : f.cells.at(f.attributes[i]));
  return cells;
}

inline LabeledExample labeled_from_row(const ExampleFile& f, const csv::Row& row) {
  if (row.size() != f.attributes.size() + 1)
    throw CsvError("expected " + std::to_string(f.attributes.size() + 1) + " fields, found " +
                   std::to_string(row.size()));
  LabeledExample e;
  for (std::size_t i = 0; i < f.attributes.size(); ++i)
    e.attributes.push_back({f.attributes[i], csv::parse_number(row[i], f.attributes[i])});
  e.label = row.back();
  return e;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<Aggregate> parse_aggregates(const std::string& spec) {
  std::vector<Aggregate> out;
  for (const auto& item : split_list(spec)) {
    std::string u;
    for (char c : item) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u == "MIN") out.push_back(Aggregate::Min);
    else if (u == "MAX") out.push_back(Aggregate::Max);
    else if (u == "AVERAGE") out.push_back(Aggregate::Average);
    else if (u == "SUM") out.push_back(Aggregate::Sum);
    else if (u == "SINGLE") out.push_back(Aggregate::Single);
    else throw UsageError("unknown aggregate '" + item + "' (use MIN, MAX, AVERAGE, SUM, SINGLE)");
  }
  if (out.empty()) throw UsageError("--aggregates needs at least one entry");
  return out;
}

inline std::vector<BinaryOperator> parse_comparators(const std::string& spec) {
  std::vector<BinaryOperator> out;
  for (const auto& item : split_list(spec)) {
    if (item == "<") out.push_back(BinaryOperator::Less);
    else if (item == "<=") out.push_back(BinaryOperator::LessEqual);
    else if (item == ">") out.push_back(BinaryOperator::Greater);
    else if (item == ">=") out.push_back(BinaryOperator::GreaterEqual);
    else throw UsageError("unknown comparator '" + item + "' (use <, <=, >, >=)");
  }
  if (out.empty()) throw UsageError("--comparators needs at least one entry");
  return out;
}

inline std::uint64_t search_budget(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SHEETSMITH_SEARCH_BUDGET"); env && *env) {
    try {
      long long v = csv::parse_integer(env, "SHEETSMITH_SEARCH_BUDGET");
      if (v <= 0) throw UsageError("SHEETSMITH_SEARCH_BUDGET must be positive");
      return static_cast<std::uint64_t>(v);
    } catch (const CsvError& e) {
      throw UsageError(e.what());
    }
  }
  return kDefaultSearchBudget;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string formula;
  std::string id = "formula";
  std::string format = "table";
};

inline int cmd_analyze(const AnalyzeOptions& o, Streams io) {
  FormulaAst ast = parse(o.formula);
  RiskReportRow row{o.id, render(ast), analyze(ast), std::nullopt};
  if (o.format == "csv") {
    csv::write_row(io.out, risk_report_header());
    csv::write_row(io.out, risk_report_fields(row));
  } else if (o.format == "json") {
    io.out << risk_report_json(row).dump(2) << '\n';
  } else {
    write_risk_table(io.out, row);
  }
  return kExitOk;
}

// ------------------------------------------------------------------- scan

struct ScanOptions {
  std::string input;
  std::string output;
  std::string format = "csv";
  bool fail_on_miller = false;
  unsigned jobs = 0;
};

inline std::vector<RiskReportRow> scan_rows(const csv::Table& t, unsigned jobs) {
  std::size_t formula_col = t.require_column("formula");
  std::optional<std::size_t> id_col = t.column("id");
  std::vector<RiskReportRow> rows(t.rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < t.rows.size(); i = next++) {
      std::string id = id_col ? t.rows[i][*id_col] : std::to_string(i + 1);
      rows[i] = make_risk_row(std::move(id), t.rows[i][formula_col]);
    }
  };
  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, t.rows.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

inline int cmd_scan(const ScanOptions& o, bool stamp, Streams io) {
  csv::Table t = csv::read_file(o.input);
  std::vector<RiskReportRow> rows = scan_rows(t, o.jobs);

  std::string body;
  if (o.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(risk_report_json(r));
    body = arr.dump(2) + "\n";
  } else {
    std::vector<csv::Row> fields;
    for (const auto& r : rows) fields.push_back(risk_report_fields(r));
    body = csv_text(risk_report_header(), fields);
  }
  if (o.output.empty() || o.output == "-") io.out << body;
  else write_file(o.output, body, stamp);

  std::size_t flagged = 0, errors = 0;
  for (const auto& r : rows) {
    if (r.metrics && r.metrics->miller_flag) ++flagged;
    if (r.parse_error) ++errors;
  }
  if (!o.output.empty() && o.output != "-")
    io.out << "scanned " << rows.size() << " formula(s): " << flagged
           << " over the Miller threshold, " << errors << " parse error(s)\n";
  if (o.fail_on_miller && flagged > 0)
    throw CommandFailed("MillerThresholdExceeded", std::to_string(flagged) +
                                                       " formula(s) exceed the Miller threshold of " +
                                                       std::to_string(kMillerThreshold));
  return kExitOk;
}

// ------------------------------------------------------------- synthesize

struct SynthesizeOptions {
  std::string examples;
  std::size_t max_depth = 5;
  bool interactive = false;
  std::string aggregates;
  std::string comparators;
  std::optional<std::uint64_t> budget;
  std::string format = "text";
};

inline void write_synthesis(std::ostream& out, const SynthesisResult& r,
                            const std::vector<LabeledExample>& examples, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["formula"] = r.rendered;
    j["depth"] = r.decision_list.rules.size();
    j["candidates_explored"] = r.candidates_explored;
    j["training_passed"] = r.training_report.passed;
    j["training_total"] = r.training_report.total();
    j["complexity"] = r.halstead.complexity;
    j["miller_concepts"] = r.halstead.miller_concepts;
    j["miller_flag"] = r.halstead.miller_flag;
    out << j.dump(2) << '\n';
    return;
  }
  out << "formula:             " << r.rendered << '\n'
      << "decision rules:      " << r.decision_list.rules.size() << '\n'
      << "candidates explored: " << r.candidates_explored << '\n'
      << "training:            " << r.training_report.passed << '/' << r.training_report.total()
      << " pass (" << examples.size() << " examples)\n"
      << "complexity:          " << format_number(r.halstead.complexity) << '\n'
      << "miller concepts:     " << r.halstead.miller_concepts
      << (r.halstead.miller_flag ? "  [exceeds threshold of 9]" : "") << '\n';
}

inline int cmd_synthesize(const SynthesizeOptions& o, Streams io) {
  ExampleFile file = read_example_file(o.examples);
  std::vector<LabeledExample> examples;
  for (std::size_t i = 0; i < file.rows.size(); ++i) examples.push_back(labeled_from_row(file, file.rows[i]));

  HypothesisConfig config;
  config.max_decision_depth = o.max_depth;
  config.cell_assignment = file.cells;
  if (!o.aggregates.empty()) config.aggregates = parse_aggregates(o.aggregates);
  if (!o.comparators.empty()) config.comparators = parse_comparators(o.comparators);
  config.search_budget = search_budget(o.budget);

  SynthesisResult result = synthesize(examples, config);
  write_synthesis(io.out, result, examples, o.format);
  if (!o.interactive) return kExitOk;

  std::string header;
  for (const auto& a : file.attributes) header += a + ",";
  header += "label";
  std::string line;
  while (true) {
    io.out << "add a counter-example row (" << header << "), or press enter to accept: " << std::flush;
    if (!std::getline(io.in, line)) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "accept" || line == "y" || line == "yes") break;
    try {
      auto rows = csv::parse_rows(line);
      if (rows.size() != 1) throw CsvError("expected exactly one row");
      examples.push_back(labeled_from_row(file, rows[0]));
    } catch (const CsvError& e) {
      io.err << "error[CsvError]: " << e.what() << '\n';
      continue;
    }
    try {
      result = synthesize(examples, config);
    } catch (const Error& e) {
      examples.pop_back();
      io.err << "error[" << e.code() << "]: " << e.what() << " (row discarded)\n";
      continue;
    }
    write_synthesis(io.out, result, examples, o.format);
  }
  io.out << "\naccepted: " << result.rendered << '\n';
  return kExitOk;
}

// --------------------------------------------------------------- validate

struct ValidateOptions {
  std::string formula;
  std::string examples;
  std::string format = "text";
};

inline int cmd_validate(const ValidateOptions& o, Streams io) {
  FormulaAst ast = parse(o.formula);
  ExampleFile file = read_example_file(o.examples);
  std::vector<CellRef> cells = example_cells(file);
  std::vector<Example> examples;
  for (const auto& row : file.rows) {
    Example ex{Grid{}, infer_value(row.back())};
    for (std::size_t i = 0; i < cells.size(); ++i) ex.grid.set(cells[i], infer_value(row[i]));
    examples.push_back(std::move(ex));
  }
  ValidationReport report = validate_examples(ast, examples);

  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["formula"] = render(ast);
    j["passed"] = report.passed;
    j["total"] = report.total();
    j["outcomes"] = nlohmann::ordered_json::array();
    for (const auto& oc : report.outcomes)
      j["outcomes"].push_back({{"example", oc.index + 1},
                               {"passed", oc.passed},
                               {"expected", oc.expected.to_string()},
                               {"actual", oc.actual.to_string()}});
    io.out << j.dump(2) << '\n';
  } else {
    for (const auto& oc : report.outcomes) {
      io.out << "example " << oc.index + 1 << ": " << (oc.passed ? "pass" : "FAIL");
      if (!oc.passed)
        io.out << "  expected=" << oc.expected.to_string() << " actual=" << oc.actual.to_string();
      io.out << '\n';
    }
    io.out << report.passed << '/' << report.total() << " pass\n";
  }
  if (!report.all_passed())
    throw CommandFailed("ValidationFailed", std::to_string(report.total() - report.passed) + "/" +
                                                std::to_string(report.total()) + " examples failed");
  return kExitOk;
}

// ------------------------------------------------------------- confidence

struct ConfidenceOptions {
  std::string results;
  std::string complexities;
  std::string output_dir = "confidence-report";
};

inline std::vector<ConfidenceRecord> read_results(const std::string& path) {
  csv::Table t = csv::read_file(path);
  const std::size_t pid = t.require_column("participant_id");
  const std::size_t qid = t.require_column("question_id");
  const std::size_t appr = t.require_column("approach");
  const std::size_t att = t.require_column("attempted");
  const std::size_t errs = t.require_column("error_count");
  const std::size_t conf = t.require_column("confidence");
  const std::size_t diff = t.require_column("difficulty");
  std::vector<ConfidenceRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = path + " line " + std::to_string(t.line_numbers[i]);
    ConfidenceRecord r;
    r.participant_id = row[pid];
    r.question_id = row[qid];
    auto a = approach_from_name(row[appr]);
    if (!a) throw CsvError(where + ": approach must be 'traditional' or 'edm'");
    r.approach = *a;
    long long attempted = csv::parse_integer(row[att], where + " attempted");
    if (attempted != 0 && attempted != 1) throw CsvError(where + ": attempted must be 0 or 1");
    r.attempted = attempted == 1;
    long long e = csv::parse_integer(row[errs], where + " error_count");
    if (e < 0) throw CsvError(where + ": error_count must be non-negative");
    r.error_count = static_cast<unsigned>(e);
    r.confidence = static_cast<int>(csv::parse_integer(row[conf], where + " confidence"));
    r.difficulty = static_cast<int>(csv::parse_integer(row[diff], where + " difficulty"));
    if (r.confidence < 1 || r.confidence > 5 || r.difficulty < 1 || r.difficulty > 5)
      throw RangeError(where + ": confidence and difficulty must lie in 1..5");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::map<std::string, double> read_complexities(const std::string& path) {
  csv::Table t = csv::read_file(path);
  const std::size_t qid = t.require_column("question_id");
  const std::size_t cx = t.require_column("complexity");
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = path + " line " + std::to_string(t.line_numbers[i]);
    if (!out.emplace(t.rows[i][qid], csv::parse_number(t.rows[i][cx], where + " complexity")).second)
      throw CsvError(where + ": duplicate question_id '" + t.rows[i][qid] + "'");
  }
  return out;
}

inline int cmd_confidence(const ConfidenceOptions& o, bool stamp, Streams io) {
  std::vector<ConfidenceRecord> records = read_results(o.results);
  std::map<std::string, double> complexities = read_complexities(o.complexities);
  ExperimentSummary summary = summarize_experiment(records, complexities);

  std::filesystem::path dir(o.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  // Per-record outcomes, input order.
  std::vector<csv::Row> outcome_rows;
  for (const auto& r : records) {
    QuestionOutcome q = question_outcome(r);
    outcome_rows.push_back({r.participant_id, r.question_id, std::string(approach_name(r.approach)),
                            r.attempted ? "1" : "0", std::to_string(r.error_count),
                            std::to_string(q.f_score), fmt(q.combined_overconfidence),
                            fmt(q.confidence_ratio)});
  }
  write_file(dir / "outcomes.csv",
             csv_text({"participant_id", "question_id", "approach", "attempted", "error_count",
                       "f_score", "combined_overconfidence", "confidence_ratio"},
                      outcome_rows),
             stamp);

  std::vector<csv::Row> approach_rows;
  for (const auto& a : summary.approaches)
    approach_rows.push_back({std::string(approach_name(a.approach)), std::to_string(a.participants),
                             std::to_string(a.attempted), fmt(a.percentage_models_with_errors),
                             fmt(a.percentage_accuracy), fmt(a.percentage_incorrect_answers),
                             fmt(a.mean_errors_per_question), fmt(a.mean_confidence_ratio)});
  write_file(dir / "approach_summary.csv",
             csv_text({"approach", "participants", "attempted", "percentage_models_with_errors",
                       "percentage_accuracy", "percentage_incorrect_answers",
                       "mean_errors_per_question", "mean_confidence_ratio"},
                      approach_rows),
             stamp);

  std::vector<csv::Row> question_rows;
  for (const auto& q : summary.questions)
    question_rows.push_back({std::string(approach_name(q.approach)), q.question_id, fmt(q.complexity),
                             std::to_string(q.attempted), fmt(q.percentage_accuracy),
                             fmt(q.mean_errors_per_question), fmt(q.mean_confidence_ratio)});
  write_file(dir / "summary.csv",
             csv_text({"approach", "question_id", "complexity", "attempted", "percentage_accuracy",
                       "mean_errors_per_question", "mean_confidence_ratio"},
                      question_rows),
             stamp);

  // Plot data: accuracy vs complexity and confidence ratio / difficulty per
  // question, one file per approach.
  std::vector<csv::Row> fit_rows;
  for (const auto& a : summary.approaches) {
    std::vector<const QuestionSummary*> qs;
    for (const auto& q : summary.questions)
      if (q.approach == a.approach) qs.push_back(&q);
    std::vector<const QuestionSummary*> by_complexity = qs;
    std::stable_sort(by_complexity.begin(), by_complexity.end(),
                     [](auto* x, auto* y) { return x->complexity < y->complexity; });
    std::vector<csv::Row> acc_rows, ratio_rows;
    std::vector<AccuracyPoint> points;
    for (const auto* q : by_complexity) {
      acc_rows.push_back({q->question_id, fmt(q->complexity), fmt(q->percentage_accuracy)});
      points.push_back({q->complexity, q->percentage_accuracy});
    }
    for (const auto* q : qs)
      ratio_rows.push_back({q->question_id, fmt(q->mean_confidence_ratio), fmt(q->mean_confidence),
                            fmt(q->mean_difficulty)});
    const std::string name(approach_name(a.approach));
    write_file(dir / ("accuracy_vs_complexity_" + name + ".csv"),
               csv_text({"question_id", "complexity", "percentage_accuracy"}, acc_rows), stamp);
    write_file(dir / ("confidence_ratio_" + name + ".csv"),
               csv_text({"question_id", "mean_confidence_ratio", "mean_confidence", "mean_difficulty"},
                        ratio_rows),
               stamp);
    try {
      CurveFit fit = fit_accuracy_curve(points);
      fit_rows.push_back({name, fmt(fit.a), fmt(fit.b), fmt(fit.r_squared), std::to_string(fit.points_used),
                          std::to_string(fit.points_dropped), fit.exceeds_ceiling ? "true" : "false"});
    } catch (const Error& e) {
      io.err << "note: no accuracy curve for " << name << ": " << e.what() << '\n';
    }
  }
  write_file(dir / "curve_fit.csv",
             csv_text({"approach", "a", "b", "r_squared", "points_used", "points_dropped",
                       "exceeds_base_error_ceiling"},
                      fit_rows),
             stamp);

  for (const auto& a : summary.approaches) {
    io.out << approach_name(a.approach) << ": participants=" << a.participants
           << " models_with_errors=" << fmt(a.percentage_models_with_errors) << "%"
           << " accuracy=" << fmt(a.percentage_accuracy) << "%"
           << " mean_errors=" << fmt(a.mean_errors_per_question)
           << " mean_confidence_ratio=" << fmt(a.mean_confidence_ratio) << '\n';
  }
  io.out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

// -------------------------------------------------------------------- fit

struct FitOptions {
  std::string points;
  std::string format = "text";
  double ceiling = kDefaultBaseErrorCeiling;
};

inline int cmd_fit(const FitOptions& o, Streams io) {
  csv::Table t = csv::read_file(o.points);
  const std::size_t cx = t.require_column("complexity");
  const std::size_t acc = t.require_column("accuracy_pct");
  std::vector<AccuracyPoint> points;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = o.points + " line " + std::to_string(t.line_numbers[i]);
    points.push_back({csv::parse_number(t.rows[i][cx], where + " complexity"),
                      csv::parse_number(t.rows[i][acc], where + " accuracy_pct")});
  }
  CurveFit fit = fit_accuracy_curve(points, o.ceiling);
  if (o.format == "csv") {
    csv::write_row(io.out, {"a", "b", "r_squared", "points_used", "points_dropped",
                            "exceeds_base_error_ceiling"});
    csv::write_row(io.out, {fmt(fit.a), fmt(fit.b), fmt(fit.r_squared), std::to_string(fit.points_used),
                            std::to_string(fit.points_dropped), fit.exceeds_ceiling ? "true" : "false"});
  } else if (o.format == "json") {
    nlohmann::ordered_json j;
    j["a"] = fit.a;
    j["b"] = fit.b;
    j["r_squared"] = fit.r_squared;
    j["points_used"] = fit.points_used;
    j["points_dropped"] = fit.points_dropped;
    j["exceeds_base_error_ceiling"] = fit.exceeds_ceiling;
    io.out << j.dump(2) << '\n';
  } else {
    io.out << "model:          accuracy = a * exp(b * complexity)\n"
           << "a:              " << fmt(fit.a) << '\n'
           << "b:              " << fmt(fit.b) << '\n'
           << "r_squared:      " << fmt(fit.r_squared) << '\n'
           << "points used:    " << fit.points_used << '\n'
           << "points dropped: " << fit.points_dropped << '\n';
    if (fit.exceeds_ceiling)
      io.out << "note: extrapolated accuracy at complexity 0 (" << fmt(fit.predict(0.0))
             << "%) exceeds the base-error ceiling of " << fmt(fit.ceiling) << "%\n";
  }
  return kExitOk;
}

} // namespace detail

/// Runs one command line. `args[0]` is the program name.
inline int run(const std::vector<std::string>& args, Streams io) {
  CLI::App app{"Spreadsheet formula risk toolkit: Halstead metrics, example-driven synthesis and "
               "overconfidence analytics",
               "sheetsmith"};
  app.require_subcommand(1);
  bool stamp = false;
  app.add_flag("--stamp", stamp, "Prefix written data files with a generation timestamp");

  detail::AnalyzeOptions analyze_opts;
  auto* analyze_cmd = app.add_subcommand("analyze", "Halstead and Miller metrics for one formula");
  analyze_cmd->add_option("formula", analyze_opts.formula, "Formula text, e.g. \"=A1+A2\"")->required();
  analyze_cmd->add_option("--id", analyze_opts.id, "Source id shown in the report");
  analyze_cmd->add_option("--format", analyze_opts.format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));

  detail::ScanOptions scan_opts;
  auto* scan_cmd = app.add_subcommand("scan", "Risk report for every formula in a CSV file");
  scan_cmd->add_option("formulas", scan_opts.input, "CSV with a 'formula' column and optional 'id'")
      ->required();
  scan_cmd->add_option("-o,--output", scan_opts.output, "Report file (default: stdout)");
  scan_cmd->add_option("--format", scan_opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  scan_cmd->add_flag("--fail-on-miller", scan_opts.fail_on_miller,
                     "Exit 1 if any formula exceeds the Miller threshold");
  scan_cmd->add_option("-j,--jobs", scan_opts.jobs, "Worker threads (default: all cores)");

  detail::SynthesizeOptions synth_opts;
  std::uint64_t budget_flag = 0;
  auto* synth_cmd = app.add_subcommand("synthesize", "Synthesize a nested-IF formula from labelled examples");
  synth_cmd->add_option("--examples", synth_opts.examples, "Examples CSV (attributes..., label)")->required();
  synth_cmd->add_option("--max-depth", synth_opts.max_depth, "Maximum decision rules");
  synth_cmd->add_flag("--interactive", synth_opts.interactive, "Refine with counter-examples from stdin");
  synth_cmd->add_option("--aggregates", synth_opts.aggregates, "Comma list of MIN,MAX,AVERAGE,SUM,SINGLE");
  synth_cmd->add_option("--comparators", synth_opts.comparators, "Comma list of <,<=,>,>=");
  auto* budget_opt = synth_cmd->add_option("--budget", budget_flag,
                                           "Candidate-list budget (overrides SHEETSMITH_SEARCH_BUDGET)");
  synth_cmd->add_option("--format", synth_opts.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  detail::ValidateOptions validate_opts;
  auto* validate_cmd = app.add_subcommand("validate", "Check a formula against example rows by substitution");
  validate_cmd->add_option("--formula", validate_opts.formula, "Formula text")->required();
  validate_cmd->add_option("--examples", validate_opts.examples, "Examples CSV (cells..., label)")->required();
  validate_cmd->add_option("--format", validate_opts.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  detail::ConfidenceOptions conf_opts;
  auto* conf_cmd = app.add_subcommand("confidence", "Overconfidence and accuracy summary with plot data");
  conf_cmd->add_option("--results", conf_opts.results, "results.csv")->required();
  conf_cmd->add_option("--complexities", conf_opts.complexities, "complexities.csv")->required();
  conf_cmd->add_option("-o,--output-dir", conf_opts.output_dir, "Directory for summary and plot files");

  detail::FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit accuracy = a*exp(b*complexity)");
  fit_cmd->add_option("--points", fit_opts.points, "points.csv (complexity,accuracy_pct)")->required();
  fit_cmd->add_option("--format", fit_opts.format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  fit_cmd->add_option("--ceiling", fit_opts.ceiling, "Base-error ceiling in percent");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    io.err << "error[Usage]: " << msg << '\n';
    return kExitUsage;
  }

  try {
    if (*analyze_cmd) return detail::cmd_analyze(analyze_opts, io);
    if (*scan_cmd) return detail::cmd_scan(scan_opts, stamp, io);
    if (*synth_cmd) {
      if (*budget_opt) synth_opts.budget = budget_flag;
      return detail::cmd_synthesize(synth_opts, io);
    }
    if (*validate_cmd) return detail::cmd_validate(validate_opts, io);
    if (*conf_cmd) return detail::cmd_confidence(conf_opts, stamp, io);
    if (*fit_cmd) return detail::cmd_fit(fit_opts, io);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    io.err << "error[" << e.code() << "]: " << msg << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    io.err << "error[Internal]: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}

} // namespace sheetsmith::cli
