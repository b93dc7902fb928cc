#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridshs {

/// Machine-readable failure category. The CLI maps each one to an exit code.
enum class ErrorCategory {
  invalid_input,
  dimension_mismatch,
  not_controllable,
  not_observable,
  numerical,
  not_converged,
  unsupported_fault,
  io,
};

std::string_view to_string(ErrorCategory category);
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace gridshs
