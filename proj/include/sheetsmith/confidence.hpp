#pragma once

// Overconfidence scoring, experiment summaries and the accuracy-vs-complexity
// exponential fit.

#include "sheetsmith/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sheetsmith {

enum class Approach { Traditional, Edm };

inline std::string_view approach_name(Approach a) {
  return a == Approach::Traditional ? "traditional" : "edm";
}

inline std::optional<Approach> approach_from_name(std::string_view name) {
  if (name == "traditional") return Approach::Traditional;
  if (name == "edm") return Approach::Edm;
  return std::nullopt;
}

struct ConfidenceRecord {
  std::string participant_id;
  std::string question_id;
  Approach approach = Approach::Traditional;
  bool attempted = true;
  unsigned error_count = 0;
  int confidence = 3;  // 1..5
  int difficulty = 3;  // 1..5
};

struct QuestionOutcome {
  int f_score = 0;
  double combined_overconfidence = 0.0;
  std::optional<double> confidence_ratio;  // absent iff f_score == 0
};

/// Weights of self-rated confidence and difficulty in the combined score.
inline constexpr double kConfidenceWeight = 0.5;
inline constexpr double kDifficultyWeight = 0.5;

/// Actual-performance mark: 5 for a clean answer, one less per error down to
/// 1, and 0 when the question was not attempted.
inline int f_score(unsigned error_count, bool attempted) {
  if (!attempted) return 0;
  return error_count >= 4 ? 1 : 5 - static_cast<int>(error_count);
}

inline double combined_overconfidence(int confidence, int difficulty) {
  if (confidence < 1 || confidence > 5)
    throw RangeError("confidence " + std::to_string(confidence) + " outside 1..5");
  if (difficulty < 1 || difficulty > 5)
    throw RangeError("difficulty " + std::to_string(difficulty) + " outside 1..5");
  return kConfidenceWeight * confidence + kDifficultyWeight * difficulty;
}

/// combined / F(x). 1 is calibrated, above 1 overconfident, below 1
/// underconfident. Unattempted questions (F = 0) have no ratio.
inline std::optional<double> confidence_ratio(double combined, int f) {
  if (f <= 0) return std::nullopt;
  return combined / static_cast<double>(f);
}

inline QuestionOutcome question_outcome(const ConfidenceRecord& r) {
  QuestionOutcome o;
  o.f_score = f_score(r.error_count, r.attempted);
  o.combined_overconfidence = combined_overconfidence(r.confidence, r.difficulty);
  o.confidence_ratio = confidence_ratio(o.combined_overconfidence, o.f_score);
  return o;
}

struct QuestionSummary {
  Approach approach = Approach::Traditional;
  std::string question_id;
  double complexity = 0.0;
  std::size_t records = 0;
  std::size_t attempted = 0;
  double percentage_accuracy = 0.0;
  double mean_errors_per_question = 0.0;
  std::optional<double> mean_confidence_ratio;
  double mean_confidence = 0.0;
  double mean_difficulty = 0.0;
};

struct ApproachSummary {
  Approach approach = Approach::Traditional;
  std::size_t participants = 0;
  std::size_t attempted = 0;
  /// Participants with at least one error on an attempted question.
  double percentage_models_with_errors = 0.0;
  /// Attempted answers with no errors.
  double percentage_accuracy = 0.0;
  /// 100 - percentage_accuracy: the per-answer reading of "incorrect".
  double percentage_incorrect_answers = 0.0;
  double mean_errors_per_question = 0.0;
  std::optional<double> mean_confidence_ratio;
};

struct ExperimentSummary {
  std::vector<ApproachSummary> approaches;  // traditional, then edm
  std::vector<QuestionSummary> questions;   // by approach, then question id

  const ApproachSummary* approach(Approach a) const {
    for (const auto& s : approaches)
      if (s.approach == a) return &s;
    return nullptr;
  }
  const QuestionSummary* question(Approach a, std::string_view id) const {
    for (const auto& q : questions)
      if (q.approach == a && q.question_id == id) return &q;
    return nullptr;
  }
};

namespace detail {

// Sorting first keeps the sum independent of record order.
inline double ordered_mean(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline std::optional<double> optional_mean(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  return ordered_mean(std::move(xs));
}

inline double percentage(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

} // namespace detail

/// Accuracy and error statistics per approach and per (approach, question).
/// Means are taken over attempted records only.
inline ExperimentSummary summarize_experiment(const std::vector<ConfidenceRecord>& records,
                                              const std::map<std::string, double>& complexities) {
  if (records.empty()) throw EmptyInput("no result records");
  for (const auto& r : records)
    if (!complexities.count(r.question_id))
      throw UnknownQuestion("question '" + r.question_id + "' has no complexity");

  ExperimentSummary summary;
  for (Approach a : {Approach::Traditional, Approach::Edm}) {
    std::vector<const ConfidenceRecord*> mine;
    for (const auto& r : records)
      if (r.approach == a) mine.push_back(&r);
    if (mine.empty()) continue;

    ApproachSummary as;
    as.approach = a;
    std::set<std::string> participants;
    std::set<std::string> with_errors;
    std::size_t correct = 0;
    unsigned long long errors = 0;
    std::vector<double> ratios;
    for (const auto* r : mine) {
      participants.insert(r->participant_id);
      QuestionOutcome o = question_outcome(*r);
      if (o.confidence_ratio) ratios.push_back(*o.confidence_ratio);
      if (!r->attempted) continue;
      ++as.attempted;
      errors += r->error_count;
      if (r->error_count == 0) ++correct;
      else with_errors.insert(r->participant_id);
    }
    as.participants = participants.size();
    as.percentage_models_with_errors = detail::percentage(with_errors.size(), participants.size());
    as.percentage_accuracy = detail::percentage(correct, as.attempted);
    as.percentage_incorrect_answers = as.attempted ? 100.0 - as.percentage_accuracy : 0.0;
    as.mean_errors_per_question =
        as.attempted ? static_cast<double>(errors) / static_cast<double>(as.attempted) : 0.0;
    as.mean_confidence_ratio = detail::optional_mean(ratios);
    summary.approaches.push_back(as);

    for (const auto& [question, complexity] : complexities) {
      QuestionSummary qs;
      qs.approach = a;
      qs.question_id = question;
      qs.complexity = complexity;
      std::size_t q_correct = 0;
      unsigned long long q_errors = 0;
      std::vector<double> q_ratios, q_conf, q_diff;
      for (const auto* r : mine) {
        if (r->question_id != question) continue;
        ++qs.records;
        QuestionOutcome o = question_outcome(*r);
        if (o.confidence_ratio) q_ratios.push_back(*o.confidence_ratio);
        q_conf.push_back(r->confidence);
        q_diff.push_back(r->difficulty);
        if (!r->attempted) continue;
        ++qs.attempted;
        q_errors += r->error_count;
        if (r->error_count == 0) ++q_correct;
      }
      if (qs.records == 0) continue;
      qs.percentage_accuracy = detail::percentage(q_correct, qs.attempted);
      qs.mean_errors_per_question =
          qs.attempted ? static_cast<double>(q_errors) / static_cast<double>(qs.attempted) : 0.0;
      qs.mean_confidence_ratio = detail::optional_mean(q_ratios);
      qs.mean_confidence = detail::ordered_mean(q_conf);
      qs.mean_difficulty = detail::ordered_mean(q_diff);
      summary.questions.push_back(std::move(qs));
    }
  }
  return summary;
}

struct AccuracyPoint {
  double complexity = 0.0;
  double accuracy_pct = 0.0;
};

/// Default ceiling (percent) above which a fit's extrapolated accuracy at
/// complexity 0 is annotated as exceeding the human base error rate.
inline constexpr double kDefaultBaseErrorCeiling = 95.0;

/// accuracy = a * exp(b * complexity), fitted by least squares on
/// (complexity, ln accuracy).
struct CurveFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
  std::size_t points_dropped = 0;
  double ceiling = kDefaultBaseErrorCeiling;
  bool exceeds_ceiling = false;

  double predict(double complexity) const { return a * std::exp(b * complexity); }
};

inline CurveFit fit_accuracy_curve(const std::vector<AccuracyPoint>& points,
                                   double ceiling = kDefaultBaseErrorCeiling) {
  std::vector<double> xs, ys;
  CurveFit fit;
  fit.ceiling = ceiling;
  for (const auto& p : points) {
    if (!(p.accuracy_pct > 0.0)) {
      ++fit.points_dropped;
      continue;
    }
    xs.push_back(p.complexity);
    ys.push_back(std::log(p.accuracy_pct));
  }
  fit.points_used = xs.size();
  if (xs.size() < 2)
    throw InsufficientPoints("need at least 2 points with positive accuracy, have " +
                             std::to_string(xs.size()));

  const double n = static_cast<double>(xs.size());
  const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DegenerateX("all complexity values are equal");

  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_x;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss_res += r * r;
  }
  fit.b = slope;
  fit.a = std::exp(intercept);
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  fit.exceeds_ceiling = fit.predict(0.0) > ceiling;
  return fit;
}

} // namespace sheetsmith
