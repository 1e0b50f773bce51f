#pragma once

#include <stdexcept>
#include <string>

namespace vt {

// Error categories map onto the CLI exit-code contract:
// usage -> 1, structural/format -> 2, numeric -> 3.
enum class ErrorKind { kUsage, kStructural, kFormat, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Shape or schema violations: missing articulators, wrong lengths, mismatched
// frame counts.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what)
      : Error(ErrorKind::kStructural, what) {}
};

// Malformed files. `code` distinguishes the failure for callers that care
// (bad magic vs truncated payload vs non-finite payload, ...).
class FormatError : public Error {
 public:
  FormatError(std::string code, const std::string& what)
      : Error(ErrorKind::kFormat, what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Undefined correlations, degenerate tests, divergence.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

int exit_code_for(ErrorKind kind);

}  // namespace vt
