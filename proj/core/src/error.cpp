#include "ricl/error.hpp"

namespace ricl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShapeMismatch:
      return "shape-mismatch";
    case ErrorKind::kSingularSystem:
      return "singular-system";
    case ErrorKind::kPreconditionViolation:
      return "precondition-violation";
    case ErrorKind::kNegativeWeight:
      return "negative-weight";
    case ErrorKind::kDivergenceDetected:
      return "divergence-detected";
    case ErrorKind::kSchemaError:
      return "schema-error";
    case ErrorKind::kEmptySeries:
      return "empty-series";
    case ErrorKind::kIoError:
      return "io-error";
  }
  return "unknown";
}

}  // namespace ricl
