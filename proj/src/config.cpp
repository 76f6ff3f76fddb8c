#include "ldpjudge/config.hpp"

#include <charconv>
#include <cstdlib>

#include <fmt/format.h>

#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"

namespace ldpjudge {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw Error(ErrorCode::kValidation,
              fmt::format("setting {} = '{}' is not {}", key, value, expected),
              {{"key", key}, {"value", value}});
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::exception&) {
  }
  bad_value(key, value, "a number");
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
  return out;
}

std::chrono::milliseconds to_millis(const std::string& key, const std::string& value) {
  const long long ms = to_integer(key, value);
  if (ms <= 0) bad_value(key, value, "a positive number of milliseconds");
  return std::chrono::milliseconds(ms);
}

std::map<std::string, std::string> parse_tokens(const std::string& key, const std::string& value) {
  std::map<std::string, std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto stop = std::min(value.find(',', start), value.size());
    const std::string item = trim(std::string_view(value).substr(start, stop - start));
    start = stop + 1;
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
      bad_value(key, value, "a list of token:reviewer pairs");
    }
    out[trim(item.substr(0, colon))] = trim(item.substr(colon + 1));
  }
  return out;
}

constexpr const char* kKeys[] = {
    "judge.endpoint_url",        "judge.model_id",
    "judge.api_key_ref",         "judge.temperature",
    "judge.max_retries",         "judge.request_timeout_ms",
    "judge.parallelism",         "judge.backoff_ms",
    "judge.answer_model_id",     "embedding.endpoint_url",
    "embedding.model_id",        "embedding.api_key_ref",
    "embedding.batch_size",      "embedding.request_timeout_ms",
    "align.similarity_threshold", "align.adjusted_text_threshold",
    "triage.correctness_threshold", "triage.relevance_threshold",
    "service.host",              "service.port",
    "service.tokens",
};

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& name) {
  std::map<std::string, std::string> out;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto stop = std::min(text.find('\n', start), text.size());
    const std::string line = trim(text.substr(start, stop - start));
    start = stop + 1;
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw Error(ErrorCode::kValidation,
                  fmt::format("{}:{}: expected key = value", name, line_number),
                  {{"file", name}, {"line", line_number}});
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) return std::nullopt;
    return std::string(value);
  };
}

void apply_setting(CliConfig& c, const std::string& key, const std::string& value) {
  if (key == "judge.endpoint_url") c.judge.endpoint_url = value;
  else if (key == "judge.model_id") c.judge.model_id = value;
  else if (key == "judge.api_key_ref") c.judge.api_key_ref = value;
  else if (key == "judge.temperature") c.judge.temperature = to_double(key, value);
  else if (key == "judge.max_retries") c.judge.max_retries = static_cast<int>(to_integer(key, value));
  else if (key == "judge.request_timeout_ms") c.judge.request_timeout = to_millis(key, value);
  else if (key == "judge.parallelism") c.judge.parallelism = static_cast<int>(to_integer(key, value));
  else if (key == "judge.backoff_ms") c.judge.backoff_base = to_millis(key, value);
  else if (key == "judge.answer_model_id") {
    c.judge.answer_model_id = value.empty() ? std::nullopt : std::optional<std::string>(value);
  } else if (key == "embedding.endpoint_url") c.align.endpoint_url = value;
  else if (key == "embedding.model_id") c.align.model_id = value;
  else if (key == "embedding.api_key_ref") c.align.api_key_ref = value;
  else if (key == "embedding.batch_size") {
    const long long n = to_integer(key, value);
    if (n < 1) bad_value(key, value, "a positive integer");
    c.align.batch_size = static_cast<std::size_t>(n);
  } else if (key == "embedding.request_timeout_ms") c.align.request_timeout = to_millis(key, value);
  else if (key == "align.similarity_threshold") c.align.similarity_threshold = to_double(key, value);
  else if (key == "align.adjusted_text_threshold") {
    c.align.adjusted_text_threshold = to_double(key, value);
  } else if (key == "triage.correctness_threshold") {
    c.triage.correctness_threshold = to_double(key, value);
  } else if (key == "triage.relevance_threshold") {
    c.triage.relevance_threshold = to_double(key, value);
  } else if (key == "service.host") c.service_host = value;
  else if (key == "service.port") {
    const long long port = to_integer(key, value);
    if (port < 0 || port > 65535) bad_value(key, value, "a port number");
    c.service_port = static_cast<int>(port);
  } else if (key == "service.tokens") c.service_tokens = parse_tokens(key, value);
  else {
    throw Error(ErrorCode::kValidation, "unknown setting " + key, {{"key", key}});
  }
}

CliConfig load_cli_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
  CliConfig config;
  if (path) {
    const auto settings = parse_key_values(read_file(*path), path->filename().string());
    for (const auto& [key, value] : settings) apply_setting(config, key, value);
  }
  for (const char* key : kKeys) {
    std::string var = "LDPJUDGE_";
    for (const char* p = key; *p; ++p) {
      var += *p == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    }
    if (auto value = env(var)) apply_setting(config, key, *value);
  }
  return config;
}

nlohmann::json judge_snapshot(const CliConfig& config) {
  nlohmann::json j = {{"endpoint_url", config.judge.endpoint_url},
                      {"model_id", config.judge.model_id},
                      {"temperature", config.judge.temperature},
                      {"answer_model_id", nullptr}};
  if (config.judge.answer_model_id) j["answer_model_id"] = *config.judge.answer_model_id;
  return j;
}

}  // namespace ldpjudge
