#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hopqa {

enum class ErrorCode {
  EmptySet,
  MalformedAction,
  MalformedReply,
  IndexOutOfRange,
  UnknownEntity,
  EmptyCorpus,
  DuplicateId,
  InvalidInput,
  ParseError,
  IoError,
  RetrievalError,
  ServiceUnavailable,
  DimensionMismatch,
  BackendError,
  Unauthorized,
  RateLimited,
  Timeout,
  ProtocolError,
  NoRuleMatched,
  EmptyBatch,
  HookFailed,
  NonPositiveAlpha,
  EmptyTruncation,
  ConfigError,
};

std::string_view error_name(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

  // Transport-level failures that a retry may fix.
  bool retryable() const noexcept {
    return code_ == ErrorCode::RateLimited || code_ == ErrorCode::Timeout ||
           code_ == ErrorCode::ServiceUnavailable || code_ == ErrorCode::BackendError;
  }

 private:
  ErrorCode code_;
};

}  // namespace hopqa
