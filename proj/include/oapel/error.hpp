#pragma once

#include <stdexcept>
#include <string>

namespace oapel {

/// Broad failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kUsage = 1,      // bad arguments, bad config, unknown names
  kData = 2,       // malformed or inconsistent input data
  kNumerical = 3,  // non-convergence, degenerate statistics
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

}  // namespace oapel
