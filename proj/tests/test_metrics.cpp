#include "fixtures.hpp"

#include "sheetsmith/metrics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace sheetsmith;
using Catch::Approx;

namespace {
HalsteadCounts counts(std::string_view f) { return halstead_counts(parse(f)); }
}

TEST_CASE("A1+A2") {
  auto m = analyze(parse("=A1+A2"));
  CHECK(m.counts == HalsteadCounts{1, 2, 1, 2});
  CHECK(m.complexity == 0.5);
  CHECK(m.miller_concepts == 3);
  CHECK_FALSE(m.miller_flag);
  CHECK_FALSE(m.out_of_range_flag);
}

TEST_CASE("single operator and single operand hits the upper bound") {
  auto m = analyze(parse("=-A1"));
  CHECK(m.counts == HalsteadCounts{1, 1, 1, 1});
  CHECK(m.complexity == 2.0);
  CHECK_FALSE(m.out_of_range_flag);
}

TEST_CASE("grading formula") {
  auto m = analyze(parse(fixtures::kGradingFormula));
  CHECK(m.counts == HalsteadCounts{5, 8, 12, 12});
  CHECK(std::fabs(m.complexity - 10.0 / 96.0) <= 1e-12);
  CHECK(m.miller_concepts == 20);
  CHECK(m.miller_flag);
  CHECK(m.volume == Approx(24 * std::log2(13.0)).margin(1e-9));
  CHECK(m.volume == Approx(88.81).margin(0.01));
  CHECK(m.difficulty == 3.75);
  CHECK(m.effort == Approx(333.04).margin(0.01));
}

TEST_CASE("ranges count as one operand; distinctness by canonical text") {
  CHECK(counts("=SUM(A1:A9)") == HalsteadCounts{1, 1, 1, 1});
  CHECK(counts("=A1+$A$1") == HalsteadCounts{1, 1, 1, 2});
  CHECK(counts("=SUM(B2:A1)+SUM(A1:B2)") == HalsteadCounts{2, 1, 3, 2});
  // Unary and binary minus share the "-" text.
  CHECK(counts("=A1--A2") == HalsteadCounts{1, 2, 2, 2});
  CHECK(counts("=1+1.0") == HalsteadCounts{1, 1, 1, 2});
}

TEST_CASE("extended measures on hand-computed counts") {
  auto a = halstead_extended({1, 1, 1, 1});
  CHECK(a.volume == 2.0);
  CHECK(a.difficulty == 0.5);
  CHECK(a.effort == 1.0);
  auto b = halstead_extended({1, 1, 2, 2});
  CHECK(b.volume == Approx(4.0 * std::log2(2.0)).margin(1e-12));
  auto c = halstead_extended({1, 2, 1, 2});
  CHECK(c.volume == Approx(4.754887502).margin(1e-9));
  CHECK(c.difficulty == 0.5);
  CHECK(c.effort == Approx(2.377443751).margin(1e-9));
}

TEST_CASE("operand-free formulae are degenerate") {
  CHECK_THROWS_AS(halstead_complexity({1, 0, 1, 0}), DegenerateFormula);
  CHECK_THROWS_AS(halstead_extended({0, 0, 0, 0}), DegenerateFormula);
}

TEST_CASE("bare operand has zero operators") {
  auto m = analyze(parse("=A1"));
  CHECK(m.counts == HalsteadCounts{0, 1, 0, 1});
  CHECK(m.complexity == 0.0);
  CHECK(m.out_of_range_flag);
}

TEST_CASE("out-of-range complexity is flagged, not clamped") {
  auto m = analyze(parse("=NOT(-A1)"));
  CHECK(m.complexity == 4.0);
  CHECK(m.out_of_range_flag);
  CHECK_FALSE(complexity_out_of_range(2.0));
  CHECK(complexity_out_of_range(2.0000001));
}

TEST_CASE("Miller threshold") {
  CHECK(kMillerThreshold == 9);
  CHECK_FALSE(miller_concepts(HalsteadCounts{1, 4, 5, 8}).flag);  // 9
  CHECK(miller_concepts(HalsteadCounts{1, 5, 5, 8}).flag);        // 10
}

TEST_CASE("adding a fresh operand never increases the complexity value") {
  // complexity = 2 n1 / (n2 N2); appending "+Xk" with a new cell grows n2
  // and N2 while n1 stays at 1.
  std::string f = "=A1";
  double previous = 2.0;
  for (int k = 2; k <= 30; ++k) {
    f += "+A" + std::to_string(k);
    double c = analyze(parse(f)).complexity;
    CHECK(c < previous);
    previous = c;
  }
}
