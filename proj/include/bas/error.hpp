#pragma once

#include <stdexcept>
#include <string>

namespace bas {

/// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  InvalidArgument,  // caller violated a precondition
  Numerical,        // conditioning / convergence failure
  Data,             // malformed dataset contents
  Io,               // filesystem / parse failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what)
      : Error(ErrorCode::InvalidArgument, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCode::Numerical, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCode::Data, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace bas
