// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "fixtures.hpp"
#include "oracle.hpp"

#include "sheetsmith/cli.hpp"
#include "sheetsmith/sheetsmith.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace sheetsmith;

namespace {

const std::string kData = SHEETSMITH_DATA_DIR;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int n, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail = std::string("exception: ") + e.what();
  }
  double s = seconds_since(t0);
  std::printf("[%s] criterion %d: %s (%.3f s)%s%s\n", c.ok ? "PASS" : "FAIL", n, title, s,
              c.ok ? "" : " -- ", c.detail.c_str());
  if (!c.ok) ++failures;
}

Value to_value(const oracle::Out& o) {
  switch (o.t) {
  case oracle::Out::N: return Value(o.n);
  case oracle::Out::S: return Value(o.s);
  case oracle::Out::B: return Value(o.b);
  case oracle::Out::E: break;
  }
  for (auto k : {EvalErrorKind::TypeMismatch, EvalErrorKind::MissingCell, EvalErrorKind::EmptyAggregate,
                 EvalErrorKind::DivideByZero, EvalErrorKind::NumError})
    if (eval_error_name(k) == o.s) return Value::error(k, "");
  return Value::error(EvalErrorKind::NumError, "unknown oracle error " + o.s);
}

} // namespace

int main() {
  criterion(1, "Halstead exactness", [](Check& c) {
    auto t0 = std::chrono::steady_clock::now();
    std::istringstream in;
    std::ostringstream out, err;
    int code = cli::run({"sheetsmith", "analyze", "=A1+A2", "--format", "json"}, {in, out, err});
    c.require(code == 0, "analyze exit code " + std::to_string(code));
    auto j = nlohmann::json::parse(out.str());
    c.require(j["n1"] == 1 && j["N1"] == 1 && j["n2"] == 2 && j["N2"] == 2, "counts for =A1+A2");
    c.require(j["complexity"].get<double>() == 0.5, "complexity of =A1+A2 is not exactly 0.5");
    auto single = analyze(parse("=-A1"));
    c.require(single.counts == HalsteadCounts{1, 1, 1, 1}, "counts for =-A1");
    c.require(single.complexity == 2.0, "complexity of =-A1 is not exactly 2.0");
    c.require(seconds_since(t0) < 1.0, "runtime >= 1 s");
  });

  criterion(2, "reference-formula metrics", [](Check& c) {
    auto t0 = std::chrono::steady_clock::now();
    auto m = analyze(parse(fixtures::kGradingFormula));
    c.require(m.counts == HalsteadCounts{5, 8, 12, 12}, "counts n1/n2/N1/N2");
    c.require(std::fabs(m.complexity - 10.0 / 96.0) <= 1e-12, "complexity != 10/96");
    c.require(m.miller_concepts == 20, "miller_concepts != 20");
    c.require(m.miller_flag, "miller_flag not set");
    c.require(seconds_since(t0) < 1.0, "runtime >= 1 s");
  });

  criterion(3, "F(x) table", [](Check& c) {
    for (unsigned e = 0; e <= 10; ++e) {
      int want = e == 0 ? 5 : e == 1 ? 4 : e == 2 ? 3 : e == 3 ? 2 : 1;
      c.require(f_score(e, true) == want, "F(" + std::to_string(e) + ") attempted");
      c.require(f_score(e, false) == 0, "F(" + std::to_string(e) + ") not attempted");
    }
  });

  criterion(4, "confidence-ratio landmarks", [](Check& c) {
    c.require(confidence_ratio(5, 1) == 5.0, "(5,1) -> 5");
    c.require(confidence_ratio(3, 3) == 1.0, "(3,3) -> 1");
    c.require(confidence_ratio(1, 5) == 0.2, "(1,5) -> 0.2");
    for (int conf = 1; conf <= 5; ++conf)
      for (int diff = 1; diff <= 5; ++diff)
        for (unsigned e = 0; e <= 10; ++e)
          for (bool att : {true, false}) {
            auto r = confidence_ratio(combined_overconfidence(conf, diff), f_score(e, att));
            if (r) c.require(*r >= 0.2 && *r <= 5.0, "ratio outside [0.2, 5]");
          }
  });

  criterion(5, "synthesis round-trip", [](Check& c) {
    auto t0 = std::chrono::steady_clock::now();
    auto result = synthesize(fixtures::covering_examples());
    auto eq = semantic_equivalence(result.formula, parse(fixtures::kGradingFormula),
                                   fixtures::grading_domain());
    c.require(eq.grids_checked == 10201, "did not check 10,201 grids");
    c.require(eq.equal, "synthesized " + result.rendered + " differs from the reference");
    c.require(seconds_since(t0) < 10.0, "runtime >= 10 s");
  });

  criterion(6, "evaluator oracle", [](Check& c) {
    oracle::Generator gen(20240601);
    std::size_t disagreements = 0;
    std::string first;
    for (int i = 0; i < 1000; ++i) {
      oracle::Node n = gen.formula(3);
      std::string src = "=" + oracle::to_text(n);
      FormulaAst ast = parse(src);
      for (int k = 0; k < 10; ++k) {
        oracle::Cells cells = gen.grid();
        Grid g;
        for (const auto& [name, v] : cells) g.set(name, to_value(v));
        Value want = to_value(oracle::run(n, cells));
        Value got = evaluate(ast, g);
        if (!(want == got)) {
          if (first.empty()) first = src + " oracle=" + want.to_string() + " evaluate=" + got.to_string();
          ++disagreements;
        }
      }
    }
    c.require(disagreements == 0, std::to_string(disagreements) + " disagreements, first: " + first);
  });

  criterion(7, "curve fit recovery", [](Check& c) {
    std::vector<AccuracyPoint> pts;
    for (double x : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0}) pts.push_back({x, 100.0 * std::exp(-2.0 * x)});
    auto fit = fit_accuracy_curve(pts);
    c.require(std::fabs(fit.a - 100.0) <= 1e-9, "a != 100");
    c.require(std::fabs(fit.b + 2.0) <= 1e-9, "b != -2");
    c.require(std::fabs(fit.r_squared - 1.0) <= 1e-9, "r^2 != 1");
    for (double k : {0.5, 2.0, 10.0}) {
      auto scaled = pts;
      for (auto& p : scaled) p.accuracy_pct *= k;
      auto s = fit_accuracy_curve(scaled);
      c.require(std::fabs(s.a - k * fit.a) <= 1e-9, "a not scaled by k");
      c.require(std::fabs(s.b - fit.b) <= 1e-9, "b changed under scaling");
    }
  });

  criterion(8, "experiment summary on the bundled fixture", [](Check& c) {
    auto records = cli::detail::read_results(kData + "/results.csv");
    auto complexities = cli::detail::read_complexities(kData + "/complexities.csv");
    auto s = summarize_experiment(records, complexities);
    const auto* trad = s.approach(Approach::Traditional);
    const auto* edm = s.approach(Approach::Edm);
    c.require(trad && edm, "missing approach");
    c.require(trad->percentage_models_with_errors == 80.0, "traditional models-with-errors != 80%");
    c.require(trad->mean_errors_per_question == 4.0, "traditional mean errors != 4.0");
    c.require(edm->percentage_accuracy == 98.0, "EDM accuracy != 98%");
    c.require(edm->mean_errors_per_question == 0.3, "EDM mean errors != 0.3");
  });

  criterion(9, "parser round-trip", [](Check& c) {
    auto render_all = [] {
      std::string all;
      for (const auto& f : fixtures::kCorpus) all += render(parse(f)) + "\n";
      return all;
    };
    for (const auto& f : fixtures::kCorpus) {
      FormulaAst ast = parse(f);
      c.require(parse(render(ast)) == ast, "round-trip failed for " + f);
    }
    c.require(render_all() == render_all(), "rendering not byte-stable");
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
