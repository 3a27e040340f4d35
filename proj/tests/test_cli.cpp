#include "fixtures.hpp"

#include "sheetsmith/cli.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const std::string kData = SHEETSMITH_DATA_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "sheetsmith");
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = sheetsmith::cli::run(args, {in, out, err});
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sheetsmith_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& body) { std::ofstream(p, std::ios::binary) << body; }

} // namespace

TEST_CASE("analyze formats") {
  auto r = run({"analyze", "=A1+A2", "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("formula,=A1+A2,1,2,1,2,0.5,") != std::string::npos);

  r = run({"analyze", fixtures::kGradingFormula, "--format", "json"});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["n1"] == 5);
  CHECK(j["N2"] == 12);
  CHECK(j["miller_concepts"] == 20);
  CHECK(j["miller_flag"] == true);

  r = run({"analyze", "=A1+A2"});
  CHECK(r.out.find("complexity:      0.5") != std::string::npos);
}

TEST_CASE("error lines carry a machine-readable code") {
  auto r = run({"analyze", "=A1+"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[SyntaxError]: at position 4", 0) == 0);

  r = run({"analyze", "=VLOOKUP(A1)"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[UnknownFunction]:", 0) == 0);

  r = run({});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error[Usage]:", 0) == 0);

  r = run({"scan", "/nonexistent/file.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error[CsvError]:", 0) == 0);
}

TEST_CASE("scan keeps input order and reports parse errors per row") {
  auto dir = temp_dir("scan");
  write(dir / "f.csv", "id,formula\na,=A1+A2\nb,=A1+\nc,=VLOOKUP(A1)\nd,=SUM(A1:A3)\n");
  auto one = run({"scan", (dir / "f.csv").string(), "-j", "1"});
  auto many = run({"scan", (dir / "f.csv").string(), "-j", "4"});
  CHECK(one.code == 0);
  CHECK(one.out == many.out);
  auto t = sheetsmith::csv::parse(one.out);
  REQUIRE(t.rows.size() == 4);
  const auto err = t.require_column("parse_error");
  CHECK(t.rows[0][0] == "a");
  CHECK(t.rows[0][err].empty());
  CHECK(t.rows[1][err].rfind("SyntaxError", 0) == 0);
  CHECK(t.rows[2][err].rfind("UnknownFunction", 0) == 0);
  CHECK(t.rows[3][0] == "d");

  auto json = run({"scan", (dir / "f.csv").string(), "--format", "json"});
  CHECK(nlohmann::json::parse(json.out).size() == 4);
}

TEST_CASE("scan --fail-on-miller") {
  auto dir = temp_dir("miller");
  write(dir / "f.csv", "formula\n" + std::string("\"") + "=IF(A1<1,\"\"a\"\",IF(A2<2,\"\"b\"\",\"\"c\"\"))\"\n");
  write(dir / "g.csv", "formula\n=A1+A2\n");
  auto r = run({"scan", (dir / "f.csv").string(), "--fail-on-miller"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error[MillerThresholdExceeded]") != std::string::npos);
  CHECK(run({"scan", (dir / "g.csv").string(), "--fail-on-miller"}).code == 0);
}

TEST_CASE("scan output file is byte-identical across runs") {
  auto dir = temp_dir("stable");
  auto a = dir / "a.csv", b = dir / "b.csv";
  CHECK(run({"scan", kData + "/formulas.csv", "-o", a.string()}).code == 0);
  CHECK(run({"scan", kData + "/formulas.csv", "-o", b.string()}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("--stamp prefixes written files") {
  auto dir = temp_dir("stamp");
  CHECK(run({"--stamp", "scan", kData + "/formulas.csv", "-o", (dir / "s.csv").string()}).code == 0);
  CHECK(slurp(dir / "s.csv").rfind("# generated ", 0) == 0);
}

TEST_CASE("synthesize from the bundled examples") {
  auto r = run({"synthesize", "--examples", kData + "/grading_examples.csv", "--format", "json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  std::string formula = j["formula"];
  auto eq = sheetsmith::semantic_equivalence(sheetsmith::parse(formula),
                                             sheetsmith::parse(fixtures::kGradingFormula),
                                             fixtures::grading_domain());
  CHECK(eq.equal);
  CHECK(j["training_passed"] == 12);
  CHECK(run({"synthesize", "--examples", kData + "/grading_examples.csv", "--format", "json"}).out == r.out);
}

TEST_CASE("synthesize limits and option parsing") {
  auto ex = kData + "/grading_examples.csv";
  auto r = run({"synthesize", "--examples", ex, "--max-depth", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[HypothesisSpaceExhausted]", 0) == 0);

  r = run({"synthesize", "--examples", ex, "--budget", "10"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[SearchBudgetExceeded]", 0) == 0);

  r = run({"synthesize", "--examples", ex, "--aggregates", "MEDIAN"});
  CHECK(r.code == 2);

  r = run({"synthesize", "--examples", ex, "--aggregates", "MIN,AVERAGE", "--comparators", "<"});
  CHECK(r.code == 0);
  CHECK(r.out.find("=IF(MIN(C5:D5)<39.5") != std::string::npos);
}

TEST_CASE("budget environment variable applies when no flag is given") {
  auto ex = kData + "/grading_examples.csv";
  ::setenv("SHEETSMITH_SEARCH_BUDGET", "10", 1);
  auto env_only = run({"synthesize", "--examples", ex});
  auto flag_wins = run({"synthesize", "--examples", ex, "--budget", "10000000"});
  ::unsetenv("SHEETSMITH_SEARCH_BUDGET");
  CHECK(env_only.code == 1);
  CHECK(env_only.err.rfind("error[SearchBudgetExceeded]", 0) == 0);
  CHECK(flag_wins.code == 0);
}

TEST_CASE("interactive synthesis accepts counter-examples from stdin") {
  auto dir = temp_dir("interactive");
  write(dir / "ex.csv", "exam,label\n30,Fail\n50,Pass\n");
  auto r = run({"synthesize", "--examples", (dir / "ex.csv").string(), "--interactive"},
               "38,Pass\naccept\n");
  CHECK(r.code == 0);
  CHECK(r.out.find("C5<34") != std::string::npos);
}

TEST_CASE("validate") {
  auto r = run({"validate", "--formula", fixtures::kGradingFormula, "--examples",
                kData + "/grading_examples.csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("12/12 pass") != std::string::npos);

  r = run({"validate", "--formula", "=1", "--examples", kData + "/grading_examples.csv"});
  CHECK(r.code == 1);
  CHECK(r.out.find("0/12 pass") != std::string::npos);
  CHECK(r.err.rfind("error[ValidationFailed]", 0) == 0);
}

TEST_CASE("confidence writes summary and plot data") {
  auto dir = temp_dir("confidence");
  auto r = run({"confidence", "--results", kData + "/results.csv", "--complexities",
                kData + "/complexities.csv", "-o", dir.string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"outcomes.csv", "summary.csv", "approach_summary.csv", "curve_fit.csv",
                        "accuracy_vs_complexity_traditional.csv", "accuracy_vs_complexity_edm.csv",
                        "confidence_ratio_traditional.csv", "confidence_ratio_edm.csv"})
    CHECK(fs::exists(dir / f));
  auto t = sheetsmith::csv::parse(slurp(dir / "approach_summary.csv"));
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][t.require_column("percentage_models_with_errors")] == "80");
  CHECK(t.rows[0][t.require_column("mean_errors_per_question")] == "4");
  CHECK(t.rows[1][t.require_column("percentage_accuracy")] == "98");
  CHECK(t.rows[1][t.require_column("mean_errors_per_question")] == "0.3");

  auto before = slurp(dir / "summary.csv");
  run({"confidence", "--results", kData + "/results.csv", "--complexities", kData + "/complexities.csv",
       "-o", dir.string()});
  CHECK(slurp(dir / "summary.csv") == before);
}

TEST_CASE("confidence input errors") {
  auto dir = temp_dir("confidence_bad");
  write(dir / "r.csv",
        "participant_id,question_id,approach,attempted,error_count,confidence,difficulty\n"
        "P1,Q9,edm,1,0,3,3\n");
  write(dir / "c.csv", "question_id,complexity\nQ1,0.5\n");
  auto r = run({"confidence", "--results", (dir / "r.csv").string(), "--complexities",
                (dir / "c.csv").string(), "-o", (dir / "out").string()});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[UnknownQuestion]", 0) == 0);

  write(dir / "r.csv",
        "participant_id,question_id,approach,attempted,error_count,confidence,difficulty\n"
        "P1,Q1,edm,1,0,9,3\n");
  r = run({"confidence", "--results", (dir / "r.csv").string(), "--complexities",
           (dir / "c.csv").string(), "-o", (dir / "out").string()});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[RangeError]", 0) == 0);

  write(dir / "r.csv", "participant_id,question_id\nP1\n");
  r = run({"confidence", "--results", (dir / "r.csv").string(), "--complexities",
           (dir / "c.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error[CsvError]", 0) == 0);
}

TEST_CASE("fit") {
  auto dir = temp_dir("fit");
  write(dir / "p.csv", "complexity,accuracy_pct\n0.1,81.87307530779818\n0.5,36.78794411714423\n");
  auto r = run({"fit", "--points", (dir / "p.csv").string(), "--format", "json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::fabs(j["a"].get<double>() - 100.0) < 1e-9);
  CHECK(std::fabs(j["b"].get<double>() + 2.0) < 1e-9);

  write(dir / "one.csv", "complexity,accuracy_pct\n0.1,50\n");
  r = run({"fit", "--points", (dir / "one.csv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[InsufficientPoints]", 0) == 0);
}
