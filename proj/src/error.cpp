#include "hopqa/error.hpp"

namespace hopqa {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::MalformedAction: return "MalformedAction";
    case ErrorCode::MalformedReply: return "MalformedReply";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::RetrievalError: return "RetrievalError";
    case ErrorCode::ServiceUnavailable: return "ServiceUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::NoRuleMatched: return "NoRuleMatched";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::HookFailed: return "HookFailed";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::EmptyTruncation: return "EmptyTruncation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace hopqa
