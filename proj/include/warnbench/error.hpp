#pragma once

#include <stdexcept>
#include <string>

namespace warnbench {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse,
  Validation,
  Io,
  Backend,
  Undefined,
  Internal,
};

// Base exception for all harness failures. The code maps 1:1 onto the
// status values of the C API.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m) : Error(ErrorCode::Parse, m) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m)
      : Error(ErrorCode::Validation, m) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& m)
      : Error(ErrorCode::InvalidArgument, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorCode::Io, m) {}
};

// Raised by HTTP-backed components; retryable marks transient failures
// (timeouts, 5xx, connection refused).
class BackendError : public Error {
 public:
  BackendError(const std::string& m, bool retryable)
      : Error(ErrorCode::Backend, m), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

// A quantity that cannot be computed from the available data, e.g.
// coverage over fewer than three failures.
class UndefinedError : public Error {
 public:
  explicit UndefinedError(const std::string& m)
      : Error(ErrorCode::Undefined, m) {}
};

}  // namespace warnbench
