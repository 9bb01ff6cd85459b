#pragma once

#include <stdexcept>
#include <string>

namespace dynreg {

enum class ErrorKind { InvalidInput, Shape, Numeric, InvalidConfig, Index, Capability };

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Index: return "index";
    case ErrorKind::Capability: return "capability";
  }
  return "unknown";
}

// Base of every error the library throws. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidInputError : Error {
  explicit InvalidInputError(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::Shape, what) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::InvalidConfig, what) {}
};
struct IndexError : Error {
  explicit IndexError(const std::string& what) : Error(ErrorKind::Index, what) {}
};
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& what) : Error(ErrorKind::Capability, what) {}
};

}  // namespace dynreg
