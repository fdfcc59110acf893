#include "sepeff/error.hpp"

namespace sepeff {

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::numeric:
      return "numeric";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

}  // namespace sepeff
