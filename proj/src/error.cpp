#include "emccd/error.hpp"

namespace emccd {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::wrong_kind: return "wrong-kind";
    case ErrorCode::empty_stack: return "empty-stack";
    case ErrorCode::empty_region: return "empty-region";
    case ErrorCode::empty_data: return "empty-data";
    case ErrorCode::fit_failure: return "fit-failure";
    case ErrorCode::degenerate_input: return "degenerate-input";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::bad_magic: return "bad-magic";
    case ErrorCode::truncated_payload: return "truncated-payload";
    case ErrorCode::unsupported_version: return "unsupported-version";
    case ErrorCode::unsupported_dtype: return "unsupported-dtype";
    case ErrorCode::size_mismatch: return "size-mismatch";
    case ErrorCode::config_parse: return "config-parse-error";
    case ErrorCode::contract_violation: return "contract-violation";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown-error";
}

}  // namespace emccd
