#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ricl {

enum class ErrorKind {
  kShapeMismatch,
  kSingularSystem,
  kPreconditionViolation,
  kNegativeWeight,
  kDivergenceDetected,
  kSchemaError,
  kEmptySeries,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported as an Error carrying a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by training loops when the objective stops being finite.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error(ErrorKind::kDivergenceDetected, what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace ricl
