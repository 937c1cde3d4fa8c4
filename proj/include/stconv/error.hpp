#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stconv {

enum class ErrorCode {
  invalid_shape,
  invalid_range,
  shape_mismatch,
  geometry,
  invalid_config,
  label,
  empty_input,
  degenerate,
  io,
  format,
  stratification,
  insufficient_data,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace stconv
