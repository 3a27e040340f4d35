#pragma once

#include "sheetsmith/evaluator.hpp"
#include "sheetsmith/formula.hpp"
#include "sheetsmith/synth.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

// Grading formula with a MIN gate and AVERAGE bands; the innermost IF has no
// else branch.
inline const std::string kGradingFormula =
    R"(=IF(MIN(C5:D5)<40,"Fail",IF(AVERAGE(C5:D5)>=70,"Dist",IF(AVERAGE(C5:D5)>=55,"Merit",IF(AVERAGE(C5:D5)>=40,"Pass")))))";

// Canonical rendering of kGradingFormula, canonicalized by hand.
inline const std::string kGradingCanonical =
    R"(=IF(MIN(C5:D5)<40,"Fail",IF(AVERAGE(C5:D5)>=70,"Dist",IF(AVERAGE(C5:D5)>=55,"Merit",IF(AVERAGE(C5:D5)>=40,"Pass")))))";

// Pinned round-trip corpus.
inline const std::array<std::string, 20> kCorpus{
    "=A1+A2",
    kGradingFormula,
    "=SUM(A1:A9)",
    "=-A1^2",
    "=(A1+A2)*A3",
    "=A1-(A2-A3)",
    "=A1/(A2*A3)",
    "=2^3^2",
    "=2^(3^2)",
    R"(=IF(A1="x",TRUE,FALSE))",
    "=NOT(AND(A1>1,OR(B1<2,C1=3)))",
    "=MAX($A$1:B$5,7)",
    "=average(d5:c4)",
    "=  1.5e3 - .25",
    R"(="say ""hi""")",
    "=A1<>B1",
    "=--A1",
    "=MIN(A1,-B1)*-2",
    R"(=if(a1>=40,"Pass"))",
    "=SUM(A1:A3)/(1+MAX(B1:B3))^2",
};

// Twelve (exam, coursework) grids covering every grade and both sides of the
// MIN gate; chosen so the smallest consistent decision list is equivalent to
// kGradingFormula on the whole 0..100 square.
inline const std::array<std::pair<int, int>, 12> kCoveringGrids{{
    {0, 0},   {39, 39},  {39, 100}, {100, 39}, {40, 40},  {40, 69},
    {41, 69}, {40, 70},  {40, 99},  {41, 99},  {40, 100}, {100, 100},
}};

inline sheetsmith::Grid grading_grid(double exam, double coursework) {
  sheetsmith::Grid g;
  g.set("C5", exam);
  g.set("D5", coursework);
  return g;
}

/// Labels produced by evaluating the grading formula on the covering grids.
inline std::vector<sheetsmith::LabeledExample> covering_examples() {
  auto ref = sheetsmith::parse(kGradingFormula);
  std::vector<sheetsmith::LabeledExample> out;
  for (auto [exam, coursework] : kCoveringGrids) {
    auto v = sheetsmith::evaluate(ref, grading_grid(exam, coursework));
    out.push_back({{{"exam", double(exam)}, {"coursework", double(coursework)}}, v.text()});
  }
  return out;
}

inline sheetsmith::Domain grading_domain() {
  sheetsmith::Domain d;
  d.axis("C5", sheetsmith::Domain::integers(0, 100));
  d.axis("D5", sheetsmith::Domain::integers(0, 100));
  return d;
}

} // namespace fixtures
