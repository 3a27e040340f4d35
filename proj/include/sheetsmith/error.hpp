#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sheetsmith {

/// Base for every error the toolkit raises. `code()` is the stable,
/// machine-greppable name printed by the CLI as `error[<code>]: <message>`.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

#define SHEETSMITH_DEFINE_ERROR(Name)                                          \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& message) : Error(#Name, message) {}       \
  }

// formula-core
class SyntaxError : public Error {
public:
  SyntaxError(std::size_t position, std::string expected)
      : Error("SyntaxError", "at position " + std::to_string(position) +
                                 ": expected " + expected),
        position_(position), expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

private:
  std::size_t position_;
  std::string expected_;
};

SHEETSMITH_DEFINE_ERROR(UnknownFunction);
SHEETSMITH_DEFINE_ERROR(ArityError);

// metrics
SHEETSMITH_DEFINE_ERROR(DegenerateFormula);

// evaluator
SHEETSMITH_DEFINE_ERROR(EmptyExampleSet);
SHEETSMITH_DEFINE_ERROR(DomainTooLarge);
SHEETSMITH_DEFINE_ERROR(UncoveredCell);

// edm-synth
SHEETSMITH_DEFINE_ERROR(InconsistentExamples);
SHEETSMITH_DEFINE_ERROR(EmptyLabel);
SHEETSMITH_DEFINE_ERROR(HypothesisSpaceExhausted);
SHEETSMITH_DEFINE_ERROR(SearchBudgetExceeded);

// confidence-analytics
SHEETSMITH_DEFINE_ERROR(RangeError);
SHEETSMITH_DEFINE_ERROR(UnknownQuestion);
SHEETSMITH_DEFINE_ERROR(EmptyInput);
SHEETSMITH_DEFINE_ERROR(InsufficientPoints);
SHEETSMITH_DEFINE_ERROR(DegenerateX);

// file ingestion
SHEETSMITH_DEFINE_ERROR(CsvError);

#undef SHEETSMITH_DEFINE_ERROR

} // namespace sheetsmith
