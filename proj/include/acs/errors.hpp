#pragma once

#include <stdexcept>
#include <string>

namespace acs {

// Error categories surfaced through the C API as status codes.
enum class errc {
  ok = 0,
  invalid_argument,
  singular_matrix,
  unsupported_operation,
  format_error,
  config_error,
  divergence,
  io_error,
  internal_error,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void throw_invalid_argument(const std::string& msg) {
  throw Error(errc::invalid_argument, msg);
}

[[noreturn]] inline void throw_singular(const std::string& msg) {
  throw Error(errc::singular_matrix, msg);
}

[[noreturn]] inline void throw_format(const std::string& msg) {
  throw Error(errc::format_error, msg);
}

[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(errc::config_error, msg);
}

}  // namespace acs
