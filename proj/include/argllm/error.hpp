#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace argllm {

enum class ErrorCode {
  unknown_argument,
  argument_is_root,
  invalid_framework,
  value_out_of_range,
  non_finite,
  unresolved_placeholder,
  unknown_template,
  backend_failure,
  unparseable_confidence,
  unparseable_answer,
  network_error,
  auth_error,
  rate_limited,
  malformed_response,
  unknown_target,
  would_remove_root,
  malformed_edit,
  parse_error,
  missing_field,
  precondition,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_argument: return "unknown-argument";
    case ErrorCode::argument_is_root: return "arg-is-root";
    case ErrorCode::invalid_framework: return "invalid-framework";
    case ErrorCode::value_out_of_range: return "value-out-of-range";
    case ErrorCode::non_finite: return "non-finite";
    case ErrorCode::unresolved_placeholder: return "unresolved-placeholder";
    case ErrorCode::unknown_template: return "unknown-template";
    case ErrorCode::backend_failure: return "backend-failure";
    case ErrorCode::unparseable_confidence: return "unparseable-confidence";
    case ErrorCode::unparseable_answer: return "unparseable-answer";
    case ErrorCode::network_error: return "network-error";
    case ErrorCode::auth_error: return "auth-error";
    case ErrorCode::rate_limited: return "rate-limited";
    case ErrorCode::malformed_response: return "malformed-response";
    case ErrorCode::unknown_target: return "unknown-target";
    case ErrorCode::would_remove_root: return "would-remove-root";
    case ErrorCode::malformed_edit: return "malformed-edit";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::missing_field: return "missing-field";
    case ErrorCode::precondition: return "precondition";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping) can branch without parsing
/// messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace argllm
