#include "gridshs/error.hpp"

namespace gridshs {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::invalid_input: return "invalid_input";
    case ErrorCategory::dimension_mismatch: return "dimension_mismatch";
    case ErrorCategory::not_controllable: return "not_controllable";
    case ErrorCategory::not_observable: return "not_observable";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::not_converged: return "not_converged";
    case ErrorCategory::unsupported_fault: return "unsupported_fault";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::invalid_input: return 2;
    case ErrorCategory::dimension_mismatch: return 3;
    case ErrorCategory::not_controllable: return 4;
    case ErrorCategory::not_observable: return 5;
    case ErrorCategory::numerical: return 6;
    case ErrorCategory::not_converged: return 7;
    case ErrorCategory::unsupported_fault: return 8;
    case ErrorCategory::io: return 9;
  }
  return 1;
}

}  // namespace gridshs
