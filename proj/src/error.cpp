#include "fatiguecz/error.hpp"

namespace fatiguecz {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::invalid_property: return "invalid-property";
    case ErrorCategory::local_solver_failure: return "local-solver-failure";
    case ErrorCategory::assembly: return "assembly";
    case ErrorCategory::non_convergence: return "non-convergence";
    case ErrorCategory::analysis_stalled: return "analysis-stalled";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::lookup: return "lookup";
    case ErrorCategory::io: return "io";
    case ErrorCategory::topology: return "topology";
    case ErrorCategory::tangent_mismatch: return "tangent-mismatch";
  }
  return "unknown";
}

}  // namespace fatiguecz
