#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldpjudge/domain.hpp"
#include "ldpjudge/error.hpp"
#include "ldpjudge/transport.hpp"

namespace ldpjudge {

struct JudgeConfig {
  std::string endpoint_url;
  std::string model_id = "scripted-judge";
  std::string api_key_ref;  // environment variable name; the key itself is never stored
  double temperature = 0.0;
  int max_retries = 3;
  std::chrono::milliseconds request_timeout{60000};
  int parallelism = 1;
  std::chrono::milliseconds backoff_base{500};
  /// Model that produced the answers, when known. Must differ from model_id.
  std::optional<std::string> answer_model_id;
};

Violations validate(const JudgeConfig& config);
HttpEndpointConfig endpoint_config(const JudgeConfig& config);

/// Produces ISO-8601 UTC timestamps; swappable for a pinned clock in tests.
using Clock = std::function<std::string()>;
Clock system_clock();
Clock fixed_clock(std::string timestamp);

/// Sends chat requests, retrying retryable transport failures with
/// exponential backoff (backoff_base * 2^k) up to max_retries times.
class ChatClient {
 public:
  ChatClient(std::shared_ptr<ChatTransport> transport, int max_retries,
             std::chrono::milliseconds backoff_base);
  RawJudgeResponse send(const ChatRequest& request) const;

 private:
  std::shared_ptr<ChatTransport> transport_;
  int max_retries_;
  std::chrono::milliseconds backoff_base_;
};

// -- prompt and wire format --------------------------------------------------

std::string build_eval_prompt(const ContractDoc& doc, const QAPair& qa);
std::string build_verify_prompt(const ContractDoc& doc, const QAPair& qa,
                                const Evaluation& first_pass);
/// Appended to the prompt when the first response could not be parsed.
std::string_view format_reminder();

/// One `<tag>text</tag>` per line. Tag names are case-insensitive; other text
/// is ignored. Returned LDPs carry source=machine and, when the text holds a
/// bracketed paragraph reference such as "[par_46]", that reference as citation.
/// Throws Error(kEmptyEvaluation) when nothing parses and Error(kMalformedTag)
/// (details.line) for `<name>...</name>` with an unknown name.
std::vector<LegalDataPoint> parse_tagged_response(std::string_view text);

/// Canonical wire format for `ldps`, one per line.
std::string render_tagged(std::span<const LegalDataPoint> ldps);

/// Last "[par_...]"-style reference inside `text`, if any.
std::optional<std::string> extract_citation(std::string_view text);

// -- judge -------------------------------------------------------------------

struct RawResponseRecord {
  std::string qa_id;
  RequestPurpose purpose = RequestPurpose::kEvaluate;
  int attempt = 0;
  RawJudgeResponse response;

  friend bool operator==(const RawResponseRecord&, const RawResponseRecord&) = default;
};

void to_json(nlohmann::json& j, const RawResponseRecord& record);
void from_json(const nlohmann::json& j, RawResponseRecord& record);

struct JudgeOutcome {
  Evaluation evaluation;
  std::vector<RawResponseRecord> raw_responses;
};

struct BatchItem {
  std::optional<JudgeOutcome> outcome;
  std::optional<Error> error;
  std::vector<RawResponseRecord> raw_responses;  // captured even when parsing failed
};

struct VerifyOutcome {
  Evaluation evaluation;
  bool warning = false;
  std::string warning_message;
  std::vector<RawResponseRecord> raw_responses;
};

class Judge {
 public:
  /// Invoked with every raw response before it is parsed.
  using RawSink = std::function<void(const RawResponseRecord&)>;

  Judge(JudgeConfig config, std::shared_ptr<ChatTransport> transport, Clock clock = system_clock());

  void set_raw_sink(RawSink sink) { sink_ = std::move(sink); }
  const JudgeConfig& config() const { return config_; }
  const ChatClient& client() const { return client_; }

  /// Segments and tags `qa.answer` in one call. Retries transport errors; on a
  /// parse failure re-prompts once with a format reminder, then rethrows.
  JudgeOutcome evaluate(const QAPair& qa, const ContractDoc& doc) const;

  /// Runs up to config.parallelism requests at once. Results keep input order.
  std::vector<BatchItem> evaluate_batch(
      std::span<const QAPair> qa_pairs,
      const std::function<const ContractDoc&(const std::string& contract_id)>& contract) const;

  /// Second pass that confirms or re-tags the first-pass LDPs. Any failure
  /// returns `first_pass` unchanged with the warning flag set.
  VerifyOutcome verify_chain(const Evaluation& first_pass, const ContractDoc& doc,
                             const QAPair& qa) const;

 private:
  Evaluation evaluate_logged(const QAPair& qa, const ContractDoc& doc,
                             std::vector<RawResponseRecord>& log) const;
  RawJudgeResponse send_logged(const ChatRequest& request,
                               std::vector<RawResponseRecord>& log) const;

  JudgeConfig config_;
  ChatClient client_;
  Clock clock_;
  RawSink sink_;
  mutable std::mutex sink_mutex_;
};

}  // namespace ldpjudge
