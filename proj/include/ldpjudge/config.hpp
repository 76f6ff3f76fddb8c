#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ldpjudge/alignment.hpp"
#include "ldpjudge/analysis.hpp"
#include "ldpjudge/judge.hpp"

namespace ldpjudge {

/// Plain `key = value` lines; `#` starts a comment line. Duplicate keys keep
/// the last value. Error(kValidation) with details.line for malformed lines.
std::map<std::string, std::string> parse_key_values(std::string_view text,
                                                    const std::string& name = "config");

struct CliConfig {
  JudgeConfig judge;
  AlignConfig align;
  TriageConfig triage;
  std::map<std::string, std::string> service_tokens;  // bearer token -> reviewer id
  std::string service_host = "127.0.0.1";
  int service_port = 8080;
  bool mock = false;
};

/// Environment lookup; the default reads the process environment.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// Recognised keys:
///   judge.endpoint_url judge.model_id judge.api_key_ref judge.temperature
///   judge.max_retries judge.request_timeout_ms judge.parallelism
///   judge.backoff_ms judge.answer_model_id
///   embedding.endpoint_url embedding.model_id embedding.api_key_ref
///   embedding.batch_size embedding.request_timeout_ms
///   align.similarity_threshold align.adjusted_text_threshold
///   triage.correctness_threshold triage.relevance_threshold
///   service.host service.port service.tokens (token:reviewer,token:reviewer)
/// Throws Error(kValidation) for unknown keys or unparsable values.
void apply_setting(CliConfig& config, const std::string& key, const std::string& value);

/// File values first, then LDPJUDGE_<KEY> environment overrides (dots become
/// underscores, upper case: LDPJUDGE_JUDGE_ENDPOINT_URL).
CliConfig load_cli_config(const std::optional<std::filesystem::path>& path,
                          const EnvLookup& env = process_env());

/// Settings that determine judge output; hashed into the run id.
nlohmann::json judge_snapshot(const CliConfig& config);

}  // namespace ldpjudge
