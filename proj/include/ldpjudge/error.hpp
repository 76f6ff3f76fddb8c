#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace ldpjudge {

enum class ErrorCode {
  kInvalidArgument,
  kValidation,
  kNotFound,
  kConflict,
  kPrecondition,
  kEmptyEvaluation,
  kMalformedTag,
  kTransport,
  kAuthentication,
  kProviderResponse,
  kInsufficientData,
  kUndefinedCorrelation,
  kDigestMismatch,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure surfaced by the library. `details` carries
/// structured context (indices, line numbers, field paths) for API callers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

/// Transport-level failure. Retryable failures (timeouts, 5xx, 429) are
/// retried by the chat client; the rest surface immediately.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, bool retryable, int http_status = 0)
      : Error(ErrorCode::kTransport, message, {{"http_status", http_status}}),
        retryable_(retryable),
        http_status_(http_status) {}

  bool retryable() const noexcept { return retryable_; }
  int http_status() const noexcept { return http_status_; }

 private:
  bool retryable_;
  int http_status_;
};

}  // namespace ldpjudge
