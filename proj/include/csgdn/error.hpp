#pragma once

#include <stdexcept>
#include <string>

namespace csgdn {

/// Coarse failure classes. The CLI maps each to a distinct exit code.
enum class ErrorCategory {
  kParse,
  kConflict,
  kDimension,
  kNumerical,
  kConvergence,
  kConfig,
  kIo,
  kInterface,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kConflict: return "conflict";
    case ErrorCategory::kDimension: return "dimension";
    case ErrorCategory::kNumerical: return "numerical";
    case ErrorCategory::kConvergence: return "convergence";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kInterface: return "interface";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(ErrorCategory::kParse,
              line ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}
  std::size_t line;
};

struct ConflictError : Error {
  explicit ConflictError(const std::string& what) : Error(ErrorCategory::kConflict, what) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(ErrorCategory::kDimension, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorCategory::kNumerical, what) {}
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(ErrorCategory::kConvergence, what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::kConfig, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

struct InterfaceError : Error {
  explicit InterfaceError(const std::string& what) : Error(ErrorCategory::kInterface, what) {}
};

}  // namespace csgdn
