#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace winscrt {

// Coarse error categories; these map onto the C API status codes and the
// CLI exit codes (Io/Parse/Invalid -> 2, Infeasible -> 3).
enum class ErrorCategory {
  Io = 1,
  Parse = 2,
  Invalid = 3,
  Infeasible = 4,
};

// All hard failures carry a stable `kind` tag (e.g. "MixedArmCluster") so
// callers and tests can dispatch without string-matching whole messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message),
        category_(category),
        kind_(std::move(kind)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& kind() const noexcept { return kind_; }

private:
  ErrorCategory category_;
  std::string kind_;
};

[[noreturn]] inline void throw_io(const std::string& kind, const std::string& msg) {
  throw Error(ErrorCategory::Io, kind, msg);
}
[[noreturn]] inline void throw_parse(const std::string& kind, const std::string& msg) {
  throw Error(ErrorCategory::Parse, kind, msg);
}
[[noreturn]] inline void throw_invalid(const std::string& kind, const std::string& msg) {
  throw Error(ErrorCategory::Invalid, kind, msg);
}
[[noreturn]] inline void throw_infeasible(const std::string& kind, const std::string& msg) {
  throw Error(ErrorCategory::Infeasible, kind, msg);
}

}  // namespace winscrt
