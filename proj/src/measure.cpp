#include "freedeconv/errors.hpp"

namespace freedeconv {

const char* to_string(NumericalFailure kind) noexcept {
  switch (kind) {
    case NumericalFailure::pole: return "pole";
    case NumericalFailure::incomplete_roots: return "incomplete-roots";
    case NumericalFailure::degenerate_ramification: return "degenerate-ramification";
    case NumericalFailure::lift_failure: return "lift-failure";
    case NumericalFailure::domain_violation: return "domain-violation";
    case NumericalFailure::no_contour: return "no-contour";
    case NumericalFailure::noisy_contour: return "noisy-contour";
    case NumericalFailure::invalid_moments: return "invalid-moments";
    case NumericalFailure::solver: return "solver";
    case NumericalFailure::baseline_failure: return "baseline-failure";
  }
  return "unknown";
}

}  // namespace freedeconv
