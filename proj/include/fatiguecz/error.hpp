#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fatiguecz {

/// Machine-readable error categories. The numeric value doubles as the CLI exit code.
enum class ErrorCategory : int {
  invalid_property = 2,
  local_solver_failure = 3,
  assembly = 4,
  non_convergence = 5,
  analysis_stalled = 6,
  parse = 7,
  lookup = 8,
  io = 9,
  topology = 10,
  tangent_mismatch = 11,
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

inline Error invalid_property(const std::string& what) {
  return Error(ErrorCategory::invalid_property, what);
}

}  // namespace fatiguecz
