#pragma once

#include <stdexcept>
#include <string>

namespace freedeconv {

/// Thrown when a caller breaks a documented precondition (bad input shape,
/// out-of-range parameter, malformed file). Maps to CLI exit code 2.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class NumericalFailure {
  pole,
  incomplete_roots,
  degenerate_ramification,
  lift_failure,
  domain_violation,
  no_contour,
  noisy_contour,
  invalid_moments,
  solver,
  baseline_failure,
};

const char* to_string(NumericalFailure kind) noexcept;

/// A numerical stage could not produce a result that meets its tolerance.
/// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(NumericalFailure kind, std::string stage, const std::string& what)
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)) {}

  NumericalFailure kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  NumericalFailure kind_;
  std::string stage_;
};

}  // namespace freedeconv
