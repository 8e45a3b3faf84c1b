#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace degcarl {

enum class ErrorKind {
  Parameter,
  Evaluation,
  InvalidCoefficient,
  UnsupportedConfiguration,
  Shape,
  NumericalFailure,
  HypothesisViolation,
  Precondition,
  StepFailure,
  Data,
  Pole,
  Construction,
  Parse,
  Validation,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Parse/validation problems, theory violations and solver breakdowns map to
  // distinct process exit codes in the CLI.
  bool is_hypothesis_failure() const noexcept {
    return kind_ == ErrorKind::HypothesisViolation || kind_ == ErrorKind::Precondition ||
           kind_ == ErrorKind::UnsupportedConfiguration;
  }
  bool is_numerical_failure() const noexcept {
    return kind_ == ErrorKind::NumericalFailure || kind_ == ErrorKind::StepFailure ||
           kind_ == ErrorKind::Construction;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace degcarl
