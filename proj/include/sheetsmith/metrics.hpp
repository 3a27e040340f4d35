#pragma once

// Halstead operator/operand counting over formula ASTs.
//
// Operators: each function-name occurrence and each binary/unary operator
// symbol. Operands: each number, text, boolean, cell and range occurrence;
// a range is a single operand and ':' is not an operator. Tokens are
// distinct by canonical text, so "$C$5" and "C5" are the same operand and
// unary and binary minus are the same operator.

#include "sheetsmith/error.hpp"
#include "sheetsmith/formula.hpp"

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <variant>

namespace sheetsmith {

struct HalsteadCounts {
  std::size_t distinct_operators = 0;  // n1
  std::size_t distinct_operands = 0;   // n2
  std::size_t total_operators = 0;     // N1
  std::size_t total_operands = 0;      // N2

  bool operator==(const HalsteadCounts&) const = default;
};

struct HalsteadExtended {
  double volume = 0.0;
  double difficulty = 0.0;
  double effort = 0.0;
};

struct MillerCount {
  std::size_t concepts = 0;
  bool flag = false;
};

/// Concepts a reader can hold at once is seven plus or minus two; above the
/// upper bound a formula is flagged.
inline constexpr std::size_t kMillerThreshold = 9;

struct MetricsReport {
  HalsteadCounts counts;
  double complexity = 0.0;
  double volume = 0.0;
  double difficulty = 0.0;
  double effort = 0.0;
  std::size_t miller_concepts = 0;
  bool miller_flag = false;
  bool out_of_range_flag = false;
};

/// Canonical token text used for operand identity.
inline std::string operand_text(const Expr& e) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CellRef> || std::is_same_v<T, RangeRef>)
          return n.canonical();
        else
          return render(Expr{n});
      },
      e.node);
}

inline HalsteadCounts halstead_counts(const FormulaAst& ast) {
  HalsteadCounts counts;
  std::set<std::string> operators;
  std::set<std::string> operands;
  walk(ast.root, [&](const Expr& e) {
    if (const auto* fc = std::get_if<FunctionCall>(&e.node)) {
      operators.emplace(function_name(fc->function));
      ++counts.total_operators;
    } else if (const auto* b = std::get_if<BinaryOp>(&e.node)) {
      operators.emplace(operator_symbol(b->op));
      ++counts.total_operators;
    } else if (std::holds_alternative<UnaryOp>(e.node)) {
      operators.emplace("-");
      ++counts.total_operators;
    } else {
      operands.insert(operand_text(e));
      ++counts.total_operands;
    }
  });
  counts.distinct_operators = operators.size();
  counts.distinct_operands = operands.size();
  return counts;
}

/// 2·n1 / (n2·N2). Lower values mean a more complex formula.
inline double halstead_complexity(const HalsteadCounts& c) {
  if (c.distinct_operands == 0 || c.total_operands == 0)
    throw DegenerateFormula("formula has no operands");
  return 2.0 * static_cast<double>(c.distinct_operators) /
         (static_cast<double>(c.distinct_operands) *
          static_cast<double>(c.total_operands));
}

/// The complexity metric nominally lies in (0, 2]; anything else is reported,
/// not clamped.
inline bool complexity_out_of_range(double complexity) {
  return complexity > 2.0 || complexity <= 0.0;
}

inline HalsteadExtended halstead_extended(const HalsteadCounts& c) {
  if (c.distinct_operands == 0 || c.distinct_operators + c.distinct_operands == 0)
    throw DegenerateFormula("volume/difficulty need at least one distinct operand");
  const double n1 = static_cast<double>(c.distinct_operators);
  const double n2 = static_cast<double>(c.distinct_operands);
  const double length = static_cast<double>(c.total_operators + c.total_operands);
  HalsteadExtended out;
  out.volume = length * std::log2(n1 + n2);
  out.difficulty = (n1 / 2.0) * (static_cast<double>(c.total_operands) / n2);
  out.effort = out.difficulty * out.volume;
  return out;
}

/// Each operator application is one step and each distinct operand one chunk.
inline MillerCount miller_concepts(const HalsteadCounts& c) {
  MillerCount m;
  m.concepts = c.total_operators + c.distinct_operands;
  m.flag = m.concepts > kMillerThreshold;
  return m;
}

inline MillerCount miller_concepts(const FormulaAst& ast) {
  return miller_concepts(halstead_counts(ast));
}

inline MetricsReport analyze(const FormulaAst& ast) {
  MetricsReport r;
  r.counts = halstead_counts(ast);
  r.complexity = halstead_complexity(r.counts);
  r.out_of_range_flag = complexity_out_of_range(r.complexity);
  auto ext = halstead_extended(r.counts);
  r.volume = ext.volume;
  r.difficulty = ext.difficulty;
  r.effort = ext.effort;
  auto miller = miller_concepts(r.counts);
  r.miller_concepts = miller.concepts;
  r.miller_flag = miller.flag;
  return r;
}

} // namespace sheetsmith
