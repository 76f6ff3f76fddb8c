#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ldpjudge/domain.hpp"

namespace ldpjudge {

// What a chat request is for. Scripted transports key their canned
// responses on it; the HTTP transport ignores everything but the prompt.
enum class RequestPurpose : std::uint8_t {
  kEvaluate,
  kVerify,
  kIncompleteInfo,
  kChangeValue,
  kAddExtraInfo,
  kContradictingInfo,
};

std::string_view to_string(RequestPurpose purpose);
std::optional<RequestPurpose> parse_request_purpose(std::string_view name);

struct ChatRequest {
  std::string prompt;
  std::string qa_id;
  RequestPurpose purpose = RequestPurpose::kEvaluate;
  int attempt = 0;  // 0 = first prompt, 1 = re-prompt after a parse failure
  std::map<std::string, std::string> context;  // structured inputs behind the prompt
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

/// Provider output captured verbatim before any parsing.
struct RawJudgeResponse {
  std::string text;
  std::string model_id;
  std::int64_t latency_ms = 0;
  std::optional<TokenUsage> token_usage;

  friend bool operator==(const RawJudgeResponse&, const RawJudgeResponse&) = default;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// Throws TransportError (retryable or not) or Error(kAuthentication).
  virtual RawJudgeResponse complete(const ChatRequest& request) = 0;
};

struct HttpEndpointConfig {
  std::string endpoint_url;  // e.g. https://api.example.com/v1/chat/completions
  std::string model_id;
  std::string api_key_ref;   // name of the environment variable holding the key
  double temperature = 0.0;
  std::chrono::milliseconds request_timeout{60000};
};

/// Chat-completion style endpoint: POST {model, messages, temperature},
/// reply text read from choices[0].message.content.
class HttpChatTransport final : public ChatTransport {
 public:
  explicit HttpChatTransport(HttpEndpointConfig config);
  RawJudgeResponse complete(const ChatRequest& request) override;

 private:
  HttpEndpointConfig config_;
};

using Responder = std::function<std::string(const ChatRequest&)>;

/// Deterministic offline transport. Responses come from `responder`; the
/// transport counts calls so tests can assert retry behaviour.
class ScriptedTransport final : public ChatTransport {
 public:
  explicit ScriptedTransport(Responder responder, std::string model_id = "scripted-judge");
  RawJudgeResponse complete(const ChatRequest& request) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  Responder responder_;
  std::string model_id_;
  std::atomic<std::size_t> calls_{0};
};

/// Deterministic stand-in for a judge LLM. Evaluation requests tag every
/// answer sentence <correct>; verification echoes the first pass; rewrite
/// requests apply fixed text edits.
std::string mock_response(const ChatRequest& request);

/// Canned responses keyed by (qa_id, purpose). The attempt index selects the
/// response, clamped to the last one. Unknown keys fall through to `fallback`.
struct JudgeScript {
  std::map<std::pair<std::string, RequestPurpose>, std::vector<std::string>> responses;

  /// JSONL records: {"qa_id": ..., "purpose": "evaluate", "responses": [...]}.
  static JudgeScript load(const std::filesystem::path& path);
  Responder responder(Responder fallback = mock_response) const;
};

/// Sentence split on ., ! or ? followed by whitespace or end of text.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace ldpjudge
