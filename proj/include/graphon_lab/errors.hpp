#pragma once

#include <stdexcept>
#include <string>

namespace graphon_lab {

enum class ErrorKind {
  domain,
  parameter,
  numeric,
  assumption_violation,
  unsupported_model,
  invalid_probability,
  wrong_regime,
  precondition,
  config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::assumption_violation: return "assumption_violation";
    case ErrorKind::unsupported_model: return "unsupported_model";
    case ErrorKind::invalid_probability: return "invalid_probability";
    case ErrorKind::wrong_regime: return "wrong_regime";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` carries the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Numeric failures and precondition breaks are runtime problems of a
  /// particular draw; everything else means the inputs were invalid.
  bool is_numeric() const noexcept {
    return kind_ == ErrorKind::numeric || kind_ == ErrorKind::precondition;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace graphon_lab
