#pragma once

#include <stdexcept>
#include <string>

namespace tabkit {

/// Broad failure class. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Usage,      ///< bad arguments, bad configuration, contract misuse
  Data,       ///< unreadable or malformed input data
  Numerical,  ///< an algorithm failed to produce a usable result
};

/// Single exception type for the toolkit. `code()` names the specific
/// condition (e.g. "RaggedRow", "DimensionMismatch") so tests and the CLI can
/// dispatch on it without a class per error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void throw_usage(std::string code, const std::string& msg) {
  throw Error(ErrorKind::Usage, std::move(code), msg);
}
[[noreturn]] inline void throw_data(std::string code, const std::string& msg) {
  throw Error(ErrorKind::Data, std::move(code), msg);
}
[[noreturn]] inline void throw_numerical(std::string code, const std::string& msg) {
  throw Error(ErrorKind::Numerical, std::move(code), msg);
}

}  // namespace tabkit
