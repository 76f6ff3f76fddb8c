#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "http_client.hpp"
#include "ldpjudge/error.hpp"
#include "ldpjudge/transport.hpp"

namespace ldpjudge {

namespace detail {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch match;
  if (!std::regex_match(url, match, pattern)) {
    throw Error(ErrorCode::kInvalidArgument, "malformed endpoint url: " + url);
  }
  ParsedUrl parsed;
  parsed.scheme_host_port = match[1].str();
  parsed.path = match[2].matched ? match[2].str() : "/";
  return parsed;
}

}  // namespace

HttpJsonReply post_json(const std::string& url, const nlohmann::json& body,
                        const std::string& api_key_ref, std::chrono::milliseconds timeout) {
  const ParsedUrl parsed = parse_url(url);
  httplib::Client client(parsed.scheme_host_port);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  httplib::Headers headers;
  if (!api_key_ref.empty()) {
    const char* key = std::getenv(api_key_ref.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::kAuthentication,
                  "environment variable " + api_key_ref + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto start = std::chrono::steady_clock::now();
  auto result = client.Post(parsed.path, headers, body.dump(), "application/json");
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  if (!result) {
    throw TransportError("request to " + parsed.scheme_host_port + " failed: " +
                             httplib::to_string(result.error()),
                         /*retryable=*/true);
  }
  const int status = result->status;
  if (status == 401 || status == 403) {
    throw Error(ErrorCode::kAuthentication,
                "provider rejected credentials (HTTP " + std::to_string(status) + ")",
                {{"http_status", status}});
  }
  if (status < 200 || status >= 300) {
    const bool retryable = status == 408 || status == 429 || status >= 500;
    throw TransportError("provider returned HTTP " + std::to_string(status), retryable, status);
  }
  HttpJsonReply reply;
  reply.latency_ms = latency;
  try {
    reply.body = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::kProviderResponse, "provider reply is not JSON");
  }
  return reply;
}

}  // namespace detail

HttpChatTransport::HttpChatTransport(HttpEndpointConfig config) : config_(std::move(config)) {}

RawJudgeResponse HttpChatTransport::complete(const ChatRequest& request) {
  const nlohmann::json body = {
      {"model", config_.model_id},
      {"temperature", config_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
  };
  auto reply = detail::post_json(config_.endpoint_url, body, config_.api_key_ref,
                                 config_.request_timeout);
  const auto& j = reply.body;
  RawJudgeResponse response;
  response.latency_ms = reply.latency_ms;
  response.model_id = j.value("model", config_.model_id);
  try {
    response.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kProviderResponse, "reply lacks choices[0].message.content");
  }
  if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
    TokenUsage counts;
    counts.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
    counts.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
    response.token_usage = counts;
  }
  return response;
}

}  // namespace ldpjudge
