#pragma once

// Spreadsheet-semantics interpreter over a cell grid, plus the substitution
// checks built on it: per-example validation and exhaustive equivalence over
// a finite domain.

#include "sheetsmith/error.hpp"
#include "sheetsmith/formula.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sheetsmith {

enum class EvalErrorKind { TypeMismatch, MissingCell, EmptyAggregate, DivideByZero, NumError };

inline std::string_view eval_error_name(EvalErrorKind k) {
  switch (k) {
  case EvalErrorKind::TypeMismatch: return "TypeMismatch";
  case EvalErrorKind::MissingCell: return "MissingCell";
  case EvalErrorKind::EmptyAggregate: return "EmptyAggregate";
  case EvalErrorKind::DivideByZero: return "DivideByZero";
  case EvalErrorKind::NumError: return "NumError";
  }
  return "?";
}

struct EvalError {
  EvalErrorKind kind;
  std::string message;

  bool operator==(const EvalError& o) const { return kind == o.kind; }
};

class Value {
public:
  using Storage = std::variant<double, std::string, bool, EvalError>;

  Value(double v) : v_(v) {}
  Value(int v) : v_(static_cast<double>(v)) {}
  Value(std::string v) : v_(std::move(v)) {}
  Value(const char* v) : v_(std::string(v)) {}
  Value(bool v) : v_(v) {}
  Value(EvalError e) : v_(std::move(e)) {}

  static Value error(EvalErrorKind kind, std::string message) {
    return Value(EvalError{kind, std::move(message)});
  }

  bool is_number() const { return std::holds_alternative<double>(v_); }
  bool is_text() const { return std::holds_alternative<std::string>(v_); }
  bool is_boolean() const { return std::holds_alternative<bool>(v_); }
  bool is_error() const { return std::holds_alternative<EvalError>(v_); }

  double number() const { return std::get<double>(v_); }
  const std::string& text() const { return std::get<std::string>(v_); }
  bool boolean() const { return std::get<bool>(v_); }
  const EvalError& error() const { return std::get<EvalError>(v_); }

  const Storage& storage() const { return v_; }

  /// Exact structural equality (errors compare by kind).
  bool operator==(const Value&) const = default;

  /// Human-readable form: numbers shortest round-trip, texts unquoted.
  std::string to_string() const {
    if (is_number()) return format_number(number());
    if (is_text()) return text();
    if (is_boolean()) return boolean() ? "TRUE" : "FALSE";
    return "#" + std::string(eval_error_name(error().kind));
  }

private:
  Storage v_;
};

inline constexpr double kValueTolerance = 1e-9;

/// Expected-vs-actual comparison: numbers within 1e-9 absolute, everything
/// else exactly (texts are case-sensitive, errors by kind).
inline bool values_match(const Value& expected, const Value& actual) {
  if (expected.is_number() && actual.is_number())
    return std::fabs(expected.number() - actual.number()) <= kValueTolerance;
  return expected == actual;
}

/// Cell contents keyed by canonical relative reference.
class Grid {
public:
  Grid() = default;
  Grid(std::initializer_list<std::pair<std::string, Value>> cells) {
    for (const auto& [ref, value] : cells) set(ref, value);
  }

  /// Accepts any reference spelling ("c5", "$C$5"); throws SyntaxError for
  /// text that is not a single cell reference.
  void set(std::string_view ref, Value value) {
    auto cell = parse_cell_ref(ref);
    if (!cell) throw SyntaxError(0, "cell reference, got '" + std::string(ref) + "'");
    set(*cell, std::move(value));
  }
  void set(const CellRef& ref, Value value) {
    cells_.insert_or_assign(ref.canonical(), std::move(value));
  }

  Value get(const CellRef& ref) const {
    auto it = cells_.find(ref.canonical());
    if (it == cells_.end())
      return Value::error(EvalErrorKind::MissingCell, "cell " + ref.canonical() + " is empty");
    return it->second;
  }

  bool contains(const CellRef& ref) const { return cells_.count(ref.canonical()) > 0; }
  const std::map<std::string, Value>& cells() const { return cells_; }

  bool operator==(const Grid&) const = default;

private:
  std::map<std::string, Value> cells_;
};

namespace detail {

inline Value mismatch(std::string what) {
  return Value::error(EvalErrorKind::TypeMismatch, std::move(what));
}

class Evaluator {
public:
  explicit Evaluator(const Grid& grid) : grid_(grid) {}

  Value eval(const Expr& e) const {
    return std::visit([&](const auto& n) { return eval_node(n); }, e.node);
  }

private:
  Value eval_node(const NumberLiteral& n) const { return n.value; }
  Value eval_node(const TextLiteral& n) const { return n.value; }
  Value eval_node(const BooleanLiteral& n) const { return n.value; }
  Value eval_node(const CellRef& n) const { return grid_.get(n); }
  Value eval_node(const RangeRef& n) const {
    return mismatch("range " + n.canonical() + " used where a single value is required");
  }

  Value eval_node(const UnaryOp& n) const {
    Value v = eval(*n.operand);
    if (v.is_error()) return v;
    if (!v.is_number()) return mismatch("negation of a non-number");
    return -v.number();
  }

  Value eval_node(const BinaryOp& n) const {
    Value lhs = eval(*n.lhs);
    if (lhs.is_error()) return lhs;
    Value rhs = eval(*n.rhs);
    if (rhs.is_error()) return rhs;
    if (is_comparison(n.op)) return compare(n.op, lhs, rhs);
    if (!lhs.is_number() || !rhs.is_number())
      return mismatch(std::string("operator ") + std::string(operator_symbol(n.op)) +
                      " needs numbers");
    const double a = lhs.number();
    const double b = rhs.number();
    double r = 0.0;
    switch (n.op) {
    case BinaryOperator::Add: r = a + b; break;
    case BinaryOperator::Subtract: r = a - b; break;
    case BinaryOperator::Multiply: r = a * b; break;
    case BinaryOperator::Divide:
      if (b == 0.0) return Value::error(EvalErrorKind::DivideByZero, "division by zero");
      r = a / b;
      break;
    case BinaryOperator::Power:
      if (a == 0.0 && b < 0.0)
        return Value::error(EvalErrorKind::DivideByZero, "zero raised to a negative power");
      r = std::pow(a, b);
      break;
    default: break;
    }
    if (!std::isfinite(r))
      return Value::error(EvalErrorKind::NumError, "result is not a finite number");
    return r;
  }

  static Value compare(BinaryOperator op, const Value& lhs, const Value& rhs) {
    int order = 0;
    if (lhs.is_number() && rhs.is_number()) {
      order = lhs.number() < rhs.number() ? -1 : (lhs.number() > rhs.number() ? 1 : 0);
    } else if (lhs.is_text() && rhs.is_text()) {
      int c = lhs.text().compare(rhs.text());
      order = c < 0 ? -1 : (c > 0 ? 1 : 0);
    } else if (lhs.is_boolean() && rhs.is_boolean()) {
      order = static_cast<int>(lhs.boolean()) - static_cast<int>(rhs.boolean());
    } else {
      return mismatch("comparison between different types");
    }
    switch (op) {
    case BinaryOperator::Less: return order < 0;
    case BinaryOperator::LessEqual: return order <= 0;
    case BinaryOperator::Greater: return order > 0;
    case BinaryOperator::GreaterEqual: return order >= 0;
    case BinaryOperator::Equal: return order == 0;
    case BinaryOperator::NotEqual: return order != 0;
    default: return mismatch("not a comparison");
    }
  }

  // Appends the numbers an aggregate argument contributes; returns an error
  // value on the first problem.
  std::optional<Value> collect_numbers(const Expr& arg, std::vector<double>& out) const {
    if (const auto* range = std::get_if<RangeRef>(&arg.node)) {
      for (std::uint32_t row = range->start.row; row <= range->end.row; ++row) {
        for (std::uint32_t col = range->start.column; col <= range->end.column; ++col) {
          Value v = grid_.get(CellRef{col, row});
          if (v.is_error()) return v;
          if (!v.is_number()) return mismatch("aggregate over a non-number cell");
          out.push_back(v.number());
        }
      }
      return std::nullopt;
    }
    Value v = eval(arg);
    if (v.is_error()) return v;
    if (!v.is_number()) return mismatch("aggregate over a non-number");
    out.push_back(v.number());
    return std::nullopt;
  }

  Value eval_node(const FunctionCall& n) const {
    switch (n.function) {
    case Function::If: {
      Value cond = eval(n.args.at(0));
      if (cond.is_error()) return cond;
      if (!cond.is_boolean()) return mismatch("IF condition is not a boolean");
      if (cond.boolean()) return eval(n.args.at(1));
      if (n.args.size() < 3) return false;
      return eval(n.args[2]);
    }
    case Function::And:
    case Function::Or: {
      bool acc = n.function == Function::And;
      for (const Expr& a : n.args) {
        Value v = eval(a);
        if (v.is_error()) return v;
        if (!v.is_boolean()) return mismatch("logical argument is not a boolean");
        acc = n.function == Function::And ? (acc && v.boolean()) : (acc || v.boolean());
      }
      return acc;
    }
    case Function::Not: {
      Value v = eval(n.args.at(0));
      if (v.is_error()) return v;
      if (!v.is_boolean()) return mismatch("NOT argument is not a boolean");
      return !v.boolean();
    }
    case Function::Min:
    case Function::Max:
    case Function::Average:
    case Function::Sum: {
      std::vector<double> xs;
      for (const Expr& a : n.args)
        if (auto err = collect_numbers(a, xs)) return *err;
      if (xs.empty()) {
        if (n.function == Function::Sum) return 0.0;
        return Value::error(EvalErrorKind::EmptyAggregate,
                            std::string(function_name(n.function)) + " over no cells");
      }
      double acc = xs.front();
      if (n.function == Function::Min) {
        for (double x : xs) acc = std::min(acc, x);
      } else if (n.function == Function::Max) {
        for (double x : xs) acc = std::max(acc, x);
      } else {
        acc = 0.0;
        for (double x : xs) acc += x;
        if (n.function == Function::Average) acc /= static_cast<double>(xs.size());
      }
      if (!std::isfinite(acc))
        return Value::error(EvalErrorKind::NumError, "aggregate is not a finite number");
      return acc;
    }
    }
    return mismatch("unknown function");
  }

  const Grid& grid_;
};

} // namespace detail

inline Value evaluate(const Expr& e, const Grid& grid) {
  return detail::Evaluator(grid).eval(e);
}

inline Value evaluate(const FormulaAst& ast, const Grid& grid) {
  return evaluate(ast.root, grid);
}

struct Example {
  Grid grid;
  Value expected;
};

struct ExampleOutcome {
  std::size_t index = 0;
  bool passed = false;
  Value expected = false;
  Value actual = false;
};

struct ValidationReport {
  std::vector<ExampleOutcome> outcomes;  // input order
  std::size_t passed = 0;

  std::size_t total() const { return outcomes.size(); }
  bool all_passed() const { return passed == outcomes.size(); }
  double pass_rate() const {
    return outcomes.empty() ? 0.0
                            : static_cast<double>(passed) / static_cast<double>(outcomes.size());
  }
};

/// Substitutes each example grid into the formula and compares the result
/// with the expected value.
inline ValidationReport validate_examples(const FormulaAst& ast, const std::vector<Example>& examples) {
  if (examples.empty()) throw EmptyExampleSet("no examples to validate against");
  ValidationReport report;
  report.outcomes.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ExampleOutcome o;
    o.index = i;
    o.expected = examples[i].expected;
    o.actual = evaluate(ast, examples[i].grid);
    o.passed = values_match(o.expected, o.actual);
    if (o.passed) ++report.passed;
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

/// Cartesian product of per-cell value lists. The first axis varies slowest.
struct Domain {
  std::vector<std::pair<CellRef, std::vector<Value>>> axes;

  Domain& axis(std::string_view ref, std::vector<Value> values) {
    auto cell = parse_cell_ref(ref);
    if (!cell) throw SyntaxError(0, "cell reference, got '" + std::string(ref) + "'");
    axes.emplace_back(CellRef{cell->column, cell->row}, std::move(values));
    return *this;
  }

  /// Integers lo..hi inclusive.
  static std::vector<Value> integers(int lo, int hi) {
    std::vector<Value> out;
    for (int v = lo; v <= hi; ++v) out.emplace_back(v);
    return out;
  }

  /// Number of grids, saturating at UINT64_MAX.
  std::uint64_t size() const {
    if (axes.empty()) return 0;
    std::uint64_t n = 1;
    for (const auto& [cell, values] : axes) {
      if (values.empty()) return 0;
      if (n > UINT64_MAX / values.size()) return UINT64_MAX;
      n *= values.size();
    }
    return n;
  }
};

inline constexpr std::uint64_t kDefaultDomainCap = 1'000'000;

struct EquivalenceResult {
  bool equal = true;
  std::optional<Grid> counterexample;
  std::uint64_t grids_checked = 0;
};

inline EquivalenceResult semantic_equivalence(const FormulaAst& a, const FormulaAst& b,
                                              const Domain& domain,
                                              std::uint64_t cap = kDefaultDomainCap) {
  const std::uint64_t total = domain.size();
  if (total == 0) throw EmptyInput("equivalence domain is empty");
  if (total > cap)
    throw DomainTooLarge("domain has " + std::to_string(total) + " grids, cap is " +
                         std::to_string(cap));

  std::vector<std::string> covered;
  for (const auto& [cell, values] : domain.axes) covered.push_back(cell.canonical());
  auto check_covered = [&](const FormulaAst& f) {
    walk(f.root, [&](const Expr& e) {
      auto require = [&](const CellRef& c) {
        if (std::find(covered.begin(), covered.end(), c.canonical()) == covered.end())
          throw UncoveredCell("cell " + c.canonical() + " is not part of the domain");
      };
      if (const auto* c = std::get_if<CellRef>(&e.node)) require(*c);
      if (const auto* r = std::get_if<RangeRef>(&e.node))
        for (auto row = r->start.row; row <= r->end.row; ++row)
          for (auto col = r->start.column; col <= r->end.column; ++col) require(CellRef{col, row});
    });
  };
  check_covered(a);
  check_covered(b);

  EquivalenceResult result;
  std::vector<std::size_t> index(domain.axes.size(), 0);
  Grid grid;
  for (std::size_t k = 0; k < domain.axes.size(); ++k)
    grid.set(domain.axes[k].first, domain.axes[k].second[0]);
  for (std::uint64_t step = 0; step < total; ++step) {
    ++result.grids_checked;
    if (!values_match(evaluate(a, grid), evaluate(b, grid))) {
      result.equal = false;
      result.counterexample = grid;
      return result;
    }
    // Odometer increment, last axis fastest.
    for (std::size_t k = domain.axes.size(); k-- > 0;) {
      auto& [cell, values] = domain.axes[k];
      if (++index[k] < values.size()) {
        grid.set(cell, values[index[k]]);
        break;
      }
      index[k] = 0;
      grid.set(cell, values[0]);
    }
  }
  return result;
}

} // namespace sheetsmith
