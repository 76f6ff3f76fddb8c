#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace ldpjudge::detail {

struct HttpJsonReply {
  nlohmann::json body;
  std::int64_t latency_ms = 0;
};

/// POSTs `body` as JSON with a bearer key read from the environment variable
/// `api_key_ref` (skipped when empty). Maps failures onto the library's error
/// types: 401/403 -> Error(kAuthentication); 408/429/5xx and connection
/// failures -> retryable TransportError; other statuses -> non-retryable.
HttpJsonReply post_json(const std::string& url, const nlohmann::json& body,
                        const std::string& api_key_ref, std::chrono::milliseconds timeout);

}  // namespace ldpjudge::detail
