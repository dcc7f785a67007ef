#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emccd {

enum class ErrorCode {
  invalid_parameter,
  wrong_kind,
  empty_stack,
  empty_region,
  empty_data,
  fit_failure,
  degenerate_input,
  io_error,
  bad_magic,
  truncated_payload,
  unsupported_version,
  unsupported_dtype,
  size_mismatch,
  config_parse,
  contract_violation,
  parse_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, std::string_view what) {
  if (!condition) fail(code, std::string(what));
}

}  // namespace emccd
