#pragma once

// Formula synthesis from labelled examples.
//
// The hypothesis space is decision lists: an ordered sequence of
// `feature <cmp> threshold -> label` rules followed by a default label,
// compiled to nested IF. Features are aggregates (MIN/MAX/AVERAGE/SUM) over
// all attribute cells, or single attribute cells. Thresholds are the observed
// feature values plus midpoints between adjacent distinct values.
//
// Search is iterative deepening over list length. Among all consistent lists
// of the smallest length the winner has the lowest Halstead complexity value,
// then the lexicographically smallest rendered text.

#include "sheetsmith/error.hpp"
#include "sheetsmith/evaluator.hpp"
#include "sheetsmith/formula.hpp"
#include "sheetsmith/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sheetsmith {

enum class Aggregate { Min, Max, Average, Sum, Single };

inline std::string_view aggregate_name(Aggregate a) {
  switch (a) {
  case Aggregate::Min: return "MIN";
  case Aggregate::Max: return "MAX";
  case Aggregate::Average: return "AVERAGE";
  case Aggregate::Sum: return "SUM";
  case Aggregate::Single: return "SINGLE";
  }
  return "?";
}

struct Attribute {
  std::string name;
  double value = 0.0;
};

struct LabeledExample {
  std::vector<Attribute> attributes;
  std::string label;
};

inline constexpr std::uint64_t kDefaultSearchBudget = 10'000'000;

struct HypothesisConfig {
  std::vector<Aggregate> aggregates{Aggregate::Min, Aggregate::Max, Aggregate::Average,
                                    Aggregate::Sum, Aggregate::Single};
  std::vector<BinaryOperator> comparators{BinaryOperator::Less, BinaryOperator::LessEqual,
                                          BinaryOperator::Greater,
                                          BinaryOperator::GreaterEqual};
  std::size_t max_decision_depth = 5;
  /// attribute name -> cell. Empty means C5, D5, E5, ... in attribute order.
  std::map<std::string, CellRef> cell_assignment;
  /// Optional declared label set; every declared label needs an example.
  std::vector<std::string> labels;
  /// Cap on candidate-list evaluations.
  std::uint64_t search_budget = kDefaultSearchBudget;
};

struct Feature {
  Aggregate aggregate;
  Expr expr;                   // e.g. MIN(C5:D5) or C5
  std::vector<double> values;  // per example
};

struct Predicate {
  std::size_t feature = 0;
  BinaryOperator comparator = BinaryOperator::Less;
  double threshold = 0.0;
};

struct CandidateSet {
  std::vector<std::string> attribute_names;
  std::vector<CellRef> cells;  // parallel to attribute_names
  std::vector<std::string> labels;
  std::vector<Feature> features;
  std::vector<std::vector<double>> thresholds;  // per feature, ascending
  std::vector<Predicate> predicates;            // deterministic search order

  Expr predicate_expr(const Predicate& p) const {
    return binary(p.comparator, features[p.feature].expr, signed_number(p.threshold));
  }
};

struct DecisionRule {
  Predicate predicate;
  std::string label;
};

struct DecisionList {
  std::vector<DecisionRule> rules;
  std::string default_label;
};

struct SynthesisResult {
  FormulaAst formula;
  std::string rendered;
  ValidationReport training_report;
  std::uint64_t candidates_explored = 0;
  MetricsReport halstead;
  DecisionList decision_list;
};

/// Sorted distinct values plus the midpoint of each adjacent pair.
inline std::vector<double> threshold_candidates(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> out;
  out.reserve(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out.push_back(values[i - 1] + (values[i] - values[i - 1]) / 2.0);
    out.push_back(values[i]);
  }
  return out;
}

namespace detail {

inline std::vector<CellRef> assign_cells(const std::vector<std::string>& names,
                                         const HypothesisConfig& config) {
  std::vector<CellRef> cells;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (config.cell_assignment.empty()) {
      cells.push_back(CellRef{static_cast<std::uint32_t>(3 + i), 5});
      continue;
    }
    auto it = config.cell_assignment.find(names[i]);
    if (it == config.cell_assignment.end())
      throw InconsistentExamples("attribute '" + names[i] + "' has no cell assignment");
    cells.push_back(CellRef{it->second.column, it->second.row});
  }
  return cells;
}

/// A contiguous row or column run becomes one range; anything else is an
/// argument list.
inline std::vector<Expr> aggregate_args(const std::vector<CellRef>& cells) {
  if (cells.size() >= 2) {
    bool row_run = true;
    bool col_run = true;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      row_run = row_run && cells[i].row == cells[0].row && cells[i].column == cells[i - 1].column + 1;
      col_run = col_run && cells[i].column == cells[0].column && cells[i].row == cells[i - 1].row + 1;
    }
    if (row_run || col_run) return {make_range(cells.front(), cells.back())};
  }
  std::vector<Expr> args;
  for (const CellRef& c : cells) args.emplace_back(c);
  return args;
}

inline Grid example_grid(const LabeledExample& ex, const std::vector<CellRef>& cells) {
  Grid g;
  for (std::size_t i = 0; i < cells.size(); ++i) g.set(cells[i], ex.attributes[i].value);
  return g;
}

class Bits {
public:
  explicit Bits(std::size_t n = 0) : n_(n), words_((n + 63) / 64, 0) {}

  static Bits all(std::size_t n) {
    Bits b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i);
    return b;
  }

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }

  Bits operator&(const Bits& o) const {
    Bits r(n_);
    for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] & o.words_[w];
    return r;
  }
  Bits without(const Bits& o) const {
    Bits r(n_);
    for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] & ~o.words_[w];
    return r;
  }
  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~o.words_[w]) return false;
    return true;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

private:
  std::size_t n_;
  std::vector<std::uint64_t> words_;
};

inline bool holds(BinaryOperator cmp, double lhs, double rhs) {
  switch (cmp) {
  case BinaryOperator::Less: return lhs < rhs;
  case BinaryOperator::LessEqual: return lhs <= rhs;
  case BinaryOperator::Greater: return lhs > rhs;
  case BinaryOperator::GreaterEqual: return lhs >= rhs;
  default: throw std::invalid_argument("comparator must be one of < <= > >=");
  }
}

} // namespace detail

inline CandidateSet enumerate_candidates(const std::vector<LabeledExample>& examples,
                                         const HypothesisConfig& config) {
  if (examples.empty()) throw EmptyExampleSet("no examples to synthesize from");

  CandidateSet set;
  for (const Attribute& a : examples.front().attributes) set.attribute_names.push_back(a.name);
  if (set.attribute_names.empty()) throw InconsistentExamples("examples have no attributes");

  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& attrs = examples[i].attributes;
    bool same = attrs.size() == set.attribute_names.size();
    for (std::size_t k = 0; same && k < attrs.size(); ++k) same = attrs[k].name == set.attribute_names[k];
    if (!same)
      throw InconsistentExamples("example " + std::to_string(i) +
                                 " does not share the attribute names of example 0");
    if (examples[i].label.empty())
      throw EmptyLabel("example " + std::to_string(i) + " has an empty label");
  }

  if (!config.labels.empty()) {
    set.labels = config.labels;
    for (const std::string& label : config.labels) {
      bool seen = std::any_of(examples.begin(), examples.end(),
                              [&](const LabeledExample& e) { return e.label == label; });
      if (!seen) throw EmptyLabel("declared label '" + label + "' has no examples");
    }
    for (std::size_t i = 0; i < examples.size(); ++i)
      if (std::find(set.labels.begin(), set.labels.end(), examples[i].label) == set.labels.end())
        throw InconsistentExamples("example " + std::to_string(i) + " has undeclared label '" +
                                   examples[i].label + "'");
  } else {
    for (const auto& e : examples)
      if (std::find(set.labels.begin(), set.labels.end(), e.label) == set.labels.end())
        set.labels.push_back(e.label);
  }

  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (std::size_t j = i + 1; j < examples.size(); ++j) {
      bool same_row = true;
      for (std::size_t k = 0; same_row && k < set.attribute_names.size(); ++k)
        same_row = examples[i].attributes[k].value == examples[j].attributes[k].value;
      if (same_row && examples[i].label != examples[j].label)
        throw InconsistentExamples("examples " + std::to_string(i) + " and " + std::to_string(j) +
                                   " have identical attributes but labels '" + examples[i].label +
                                   "' and '" + examples[j].label + "'");
    }
  }

  set.cells = detail::assign_cells(set.attribute_names, config);
  std::vector<Grid> grids;
  for (const auto& e : examples) grids.push_back(detail::example_grid(e, set.cells));

  auto add_feature = [&](Aggregate agg, Expr expr) {
    Feature f{agg, std::move(expr), {}};
    for (const Grid& g : grids) {
      Value v = evaluate(f.expr, g);
      if (!v.is_number()) throw InconsistentExamples("feature " + render(f.expr) + " is not numeric");
      f.values.push_back(v.number());
    }
    set.features.push_back(std::move(f));
  };
  for (Aggregate agg : config.aggregates) {
    switch (agg) {
    case Aggregate::Single:
      for (const CellRef& c : set.cells) add_feature(agg, c);
      break;
    case Aggregate::Min: add_feature(agg, call(Function::Min, detail::aggregate_args(set.cells))); break;
    case Aggregate::Max: add_feature(agg, call(Function::Max, detail::aggregate_args(set.cells))); break;
    case Aggregate::Average:
      add_feature(agg, call(Function::Average, detail::aggregate_args(set.cells)));
      break;
    case Aggregate::Sum: add_feature(agg, call(Function::Sum, detail::aggregate_args(set.cells))); break;
    }
  }

  for (std::size_t f = 0; f < set.features.size(); ++f) {
    set.thresholds.push_back(threshold_candidates(set.features[f].values));
    for (double t : set.thresholds.back())
      for (BinaryOperator cmp : config.comparators) {
        if (!is_comparison(cmp) || cmp == BinaryOperator::Equal || cmp == BinaryOperator::NotEqual)
          throw std::invalid_argument("comparator must be one of < <= > >=");
        set.predicates.push_back(Predicate{f, cmp, t});
      }
  }
  return set;
}

/// Nested IF: IF(p1, "l1", IF(p2, "l2", ... "default")).
inline FormulaAst compile(const DecisionList& list, const CandidateSet& set) {
  Expr body = text(list.default_label);
  for (auto it = list.rules.rbegin(); it != list.rules.rend(); ++it)
    body = call(Function::If, {set.predicate_expr(it->predicate), text(it->label), std::move(body)});
  return FormulaAst{std::move(body)};
}

namespace detail {

class DecisionListSearch {
public:
  DecisionListSearch(const CandidateSet& set, const std::vector<LabeledExample>& examples,
                     std::uint64_t budget)
      : set_(set), budget_(budget), n_(examples.size()) {
    for (const std::string& label : set.labels) {
      Bits mask(n_);
      for (std::size_t i = 0; i < n_; ++i)
        if (examples[i].label == label) mask.set(i);
      label_masks_.push_back(std::move(mask));
    }
    for (const Predicate& p : set.predicates) {
      Bits mask(n_);
      const auto& values = set.features[p.feature].values;
      for (std::size_t i = 0; i < n_; ++i)
        if (holds(p.comparator, values[i], p.threshold)) mask.set(i);
      predicate_masks_.push_back(std::move(mask));
    }
  }

  /// Returns true when at least one consistent list of exactly `depth` rules
  /// exists; the best one is kept in `best()`.
  bool run(std::size_t depth) {
    depth_ = depth;
    found_ = false;
    stack_.clear();
    descend(Bits::all(n_), 0);
    return found_;
  }

  const DecisionList& best() const { return best_list_; }
  std::uint64_t explored() const { return explored_; }
  double best_pass_rate() const { return static_cast<double>(best_correct_) / static_cast<double>(n_); }

private:
  std::optional<std::size_t> uniform_label(const Bits& subset) const {
    for (std::size_t l = 0; l < label_masks_.size(); ++l)
      if (subset.subset_of(label_masks_[l])) return l;
    return std::nullopt;
  }

  std::size_t distinct_labels(const Bits& subset) const {
    std::size_t k = 0;
    for (const Bits& m : label_masks_)
      if ((subset & m).any()) ++k;
    return k;
  }

  void note_partial(const Bits& remaining) {
    std::size_t majority = 0;
    for (const Bits& m : label_masks_) majority = std::max(majority, (remaining & m).count());
    best_correct_ = std::max(best_correct_, correct_so_far_ + majority);
  }

  void descend(const Bits& remaining, std::size_t level) {
    note_partial(remaining);
    if (level == depth_) {
      if (auto l = uniform_label(remaining)) consider(*l);
      return;
    }
    const std::size_t rules_left_after = depth_ - level - 1;
    for (std::size_t p = 0; p < predicate_masks_.size(); ++p) {
      if (++explored_ > budget_)
        throw SearchBudgetExceeded("search budget of " + std::to_string(budget_) +
                                   " candidate lists exhausted");
      Bits captured = predicate_masks_[p] & remaining;
      if (!captured.any()) continue;
      auto label = uniform_label(captured);
      if (!label) continue;
      Bits rest = remaining.without(captured);
      if (!rest.any()) continue;  // the rule could have been the default
      if (distinct_labels(rest) > rules_left_after + 1) continue;
      stack_.push_back(DecisionRule{set_.predicates[p], set_.labels[*label]});
      std::size_t gained = captured.count();
      correct_so_far_ += gained;
      descend(rest, level + 1);
      correct_so_far_ -= gained;
      stack_.pop_back();
    }
  }

  void consider(std::size_t default_label) {
    DecisionList list{stack_, set_.labels[default_label]};
    FormulaAst ast = compile(list, set_);
    double complexity = halstead_complexity(halstead_counts(ast));
    std::string rendered = render(ast);
    if (!found_ || complexity < best_complexity_ ||
        (complexity == best_complexity_ && rendered < best_rendered_)) {
      best_list_ = std::move(list);
      best_complexity_ = complexity;
      best_rendered_ = std::move(rendered);
    }
    found_ = true;
  }

  const CandidateSet& set_;
  std::uint64_t budget_;
  std::size_t n_;
  std::vector<Bits> label_masks_;
  std::vector<Bits> predicate_masks_;

  std::size_t depth_ = 0;
  std::vector<DecisionRule> stack_;
  std::uint64_t explored_ = 0;
  std::size_t correct_so_far_ = 0;
  std::size_t best_correct_ = 0;

  bool found_ = false;
  DecisionList best_list_;
  double best_complexity_ = 0.0;
  std::string best_rendered_;
};

} // namespace detail

inline std::vector<Example> to_examples(const std::vector<LabeledExample>& labeled,
                                        const std::vector<CellRef>& cells) {
  std::vector<Example> out;
  for (const auto& e : labeled) out.push_back(Example{detail::example_grid(e, cells), Value(e.label)});
  return out;
}

inline SynthesisResult synthesize(const std::vector<LabeledExample>& examples,
                                  const HypothesisConfig& config = {}) {
  CandidateSet set = enumerate_candidates(examples, config);
  detail::DecisionListSearch search(set, examples, config.search_budget);

  for (std::size_t depth = 0; depth <= config.max_decision_depth; ++depth) {
    if (!search.run(depth)) continue;
    SynthesisResult r;
    r.decision_list = search.best();
    r.formula = compile(r.decision_list, set);
    r.rendered = render(r.formula);
    r.training_report = validate_examples(r.formula, to_examples(examples, set.cells));
    r.candidates_explored = search.explored();
    r.halstead = analyze(r.formula);
    if (!r.training_report.all_passed())
      throw std::logic_error("synthesized formula disagrees with its training examples");
    return r;
  }
  std::ostringstream msg;
  msg << "no decision list of depth <= " << config.max_decision_depth
      << " fits all examples; best pass rate " << format_number(100.0 * search.best_pass_rate())
      << "%";
  throw HypothesisSpaceExhausted(msg.str());
}

} // namespace sheetsmith
