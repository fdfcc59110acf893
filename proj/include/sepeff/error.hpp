#pragma once

#include <stdexcept>
#include <string>

namespace sepeff {

enum class ErrorKind { validation, numeric, io };

/// Base exception. `module` names the component that raised it so the CLI
/// can report provenance in its one-line error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string module, const std::string& message)
      : Error(ErrorKind::validation, std::move(module), message) {}
};

class NumericError : public Error {
 public:
  NumericError(std::string module, const std::string& message)
      : Error(ErrorKind::numeric, std::move(module), message) {}
};

class IoError : public Error {
 public:
  IoError(std::string module, const std::string& message)
      : Error(ErrorKind::io, std::move(module), message) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace sepeff
