#include "ldpjudge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <ctime>
#include <regex>
#include <thread>

#include <nlohmann/json.hpp>

#include "ldpjudge/json_io.hpp"

namespace ldpjudge {

Violations validate(const JudgeConfig& config) {
  Violations out;
  if (config.model_id.empty()) out.push_back({"model_id", "model_id non-empty"});
  if (config.temperature < 0.0) out.push_back({"temperature", "temperature >= 0"});
  if (config.max_retries < 0 || config.max_retries > 10) {
    out.push_back({"max_retries", "max_retries in 0..10"});
  }
  if (config.parallelism < 1) out.push_back({"parallelism", "parallelism >= 1"});
  if (config.request_timeout.count() <= 0) {
    out.push_back({"request_timeout", "request_timeout > 0"});
  }
  if (config.answer_model_id && *config.answer_model_id == config.model_id) {
    out.push_back({"answer_model_id", "answer generator must differ from the judge model"});
  }
  return out;
}

HttpEndpointConfig endpoint_config(const JudgeConfig& config) {
  HttpEndpointConfig out;
  out.endpoint_url = config.endpoint_url;
  out.model_id = config.model_id;
  out.api_key_ref = config.api_key_ref;
  out.temperature = config.temperature;
  out.request_timeout = config.request_timeout;
  return out;
}

Clock system_clock() {
  return [] {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return std::string(buffer);
  };
}

Clock fixed_clock(std::string timestamp) {
  if (!is_iso8601_utc(timestamp)) {
    throw Error(ErrorCode::kInvalidArgument, "fixed clock needs YYYY-MM-DDTHH:MM:SSZ");
  }
  return [timestamp = std::move(timestamp)] { return timestamp; };
}

ChatClient::ChatClient(std::shared_ptr<ChatTransport> transport, int max_retries,
                       std::chrono::milliseconds backoff_base)
    : transport_(std::move(transport)), max_retries_(max_retries), backoff_base_(backoff_base) {
  if (!transport_) throw Error(ErrorCode::kInvalidArgument, "chat transport is null");
}

RawJudgeResponse ChatClient::send(const ChatRequest& request) const {
  for (int retry = 0;; ++retry) {
    try {
      return transport_->complete(request);
    } catch (const TransportError& e) {
      if (!e.retryable() || retry >= max_retries_) throw;
      std::this_thread::sleep_for(backoff_base_ * (1LL << retry));
    }
  }
}

// -- prompt --------------------------------------------------------------------

namespace {

constexpr std::string_view kOutputFormat =
    "OUTPUT FORMAT\n"
    "Write one Legal Data Point per line and nothing else, using exactly one of:\n"
    "<correct>...</correct>\n"
    "<incorrect>...</incorrect>\n"
    "<irrelevant>...</irrelevant>\n"
    "<missing>...</missing>\n"
    "List the data points in the order they appear in the answer, followed by any\n"
    "missing data points. Keep paragraph references such as [par_12] inside the text.\n";

}  // namespace

std::string build_eval_prompt(const ContractDoc& doc, const QAPair& qa) {
  std::string prompt;
  prompt +=
      "You are a legal expert reviewing an answer to a question about a legal contract.\n\n"
      "Work through the answer as a reviewing lawyer would:\n"
      "1. Split the answer into Legal Data Points: self-contained assertions, each of which\n"
      "   can be checked on its own.\n"
      "2. Tag each data point. Use <incorrect> if it contains a factual error or a statement\n"
      "   the contract does not support. Otherwise use <irrelevant> if it does not help\n"
      "   answer the question. Otherwise use <correct>.\n"
      "3. Add any information from the contract that the answer should have included but\n"
      "   did not as new data points tagged <missing>.\n"
      "4. Report the result in the output format below.\n\n";
  prompt += "CONTRACT (" + doc.contract_type + ")\n" + doc.text + "\n\n";
  prompt += "QUESTION\n" + qa.question + "\n\n";
  prompt += "ANSWER\n" + qa.answer + "\n\n";
  if (qa.ground_truth) {
    prompt += "GROUND TRUTH ANSWER (written by an expert; use it as extra evidence)\n" +
              *qa.ground_truth + "\n\n";
  }
  prompt += kOutputFormat;
  return prompt;
}

std::string build_verify_prompt(const ContractDoc& doc, const QAPair& qa,
                                const Evaluation& first_pass) {
  std::string prompt;
  prompt +=
      "You are a legal expert checking another reviewer's assessment of an answer to a\n"
      "question about a legal contract. Each Legal Data Point below carries a tag. For every\n"
      "data point, confirm the tag or replace it with the correct one, re-splitting a data\n"
      "point only if it mixes assertions that deserve different tags. Keep <missing> data\n"
      "points that are genuinely absent from the answer and add any others you find.\n\n";
  prompt += "CONTRACT (" + doc.contract_type + ")\n" + doc.text + "\n\n";
  prompt += "QUESTION\n" + qa.question + "\n\n";
  prompt += "ANSWER\n" + qa.answer + "\n\n";
  prompt += "FIRST-PASS DATA POINTS\n" + render_tagged(first_pass.ldps) + "\n";
  prompt += kOutputFormat;
  return prompt;
}

std::string_view format_reminder() {
  return "\nREMINDER: your previous reply could not be read. Reply only with lines of the form\n"
         "<tag>data point</tag> where tag is correct, incorrect, irrelevant or missing.\n";
}

// -- wire format ---------------------------------------------------------------

std::optional<std::string> extract_citation(std::string_view text) {
  static const std::regex pattern(R"(\[par_[A-Za-z0-9_.\-]+\])");
  std::optional<std::string> last;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator();
       ++it) {
    last = it->str();
  }
  return last;
}

namespace {

bool is_tag_name_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Case-insensitive search for "</name>" starting at `from`.
std::size_t find_closing(std::string_view line, std::string_view name, std::size_t from) {
  const std::string needle = "</" + to_lower_ascii(name) + ">";
  const std::string lowered = to_lower_ascii(line);
  return lowered.find(needle, from);
}

LegalDataPoint make_ldp(std::string text, Tag tag) {
  LegalDataPoint ldp;
  ldp.citation = extract_citation(text);
  ldp.text = std::move(text);
  ldp.tag = tag;
  ldp.source = Actor::kMachine;
  return ldp;
}

}  // namespace

std::vector<LegalDataPoint> parse_tagged_response(std::string_view text) {
  std::vector<LegalDataPoint> out;
  std::size_t line_number = 0;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    const std::string_view line = text.substr(line_start, line_end - line_start);
    ++line_number;

    std::size_t pos = 0;
    bool matched_closed = false;
    while ((pos = line.find('<', pos)) != std::string_view::npos) {
      std::size_t name_end = pos + 1;
      while (name_end < line.size() && is_tag_name_char(line[name_end])) ++name_end;
      if (name_end == pos + 1 || name_end >= line.size() || line[name_end] != '>') {
        ++pos;
        continue;
      }
      const std::string_view name = line.substr(pos + 1, name_end - pos - 1);
      const std::size_t body_start = name_end + 1;
      const std::size_t close = find_closing(line, name, body_start);
      if (close == std::string::npos) {
        ++pos;
        continue;
      }
      const auto tag = parse_tag(name);
      if (!tag) {
        throw Error(ErrorCode::kMalformedTag,
                    "unknown tag <" + std::string(name) + "> on line " +
                        std::to_string(line_number),
                    {{"line", line_number}, {"tag", std::string(name)}});
      }
      std::string body = trim(line.substr(body_start, close - body_start));
      if (!body.empty()) out.push_back(make_ldp(std::move(body), *tag));
      matched_closed = true;
      pos = close + name.size() + 3;
    }

    // Open-prefix style ("<Correct> text") is accepted when it starts the line.
    if (!matched_closed) {
      const std::string trimmed = trim(line);
      if (!trimmed.empty() && trimmed.front() == '<') {
        const std::size_t gt = trimmed.find('>');
        if (gt != std::string::npos) {
          if (auto tag = parse_tag(std::string_view(trimmed).substr(1, gt - 1))) {
            std::string body = trim(std::string_view(trimmed).substr(gt + 1));
            if (!body.empty()) out.push_back(make_ldp(std::move(body), *tag));
          }
        }
      }
    }
    line_start = line_end + 1;
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyEvaluation, "no tagged legal data points in response");
  }
  return out;
}

std::string render_tagged(std::span<const LegalDataPoint> ldps) {
  std::string out;
  for (const auto& ldp : ldps) {
    const auto name = to_string(ldp.tag);
    out += "<";
    out += name;
    out += ">";
    out += ldp.text;
    out += "</";
    out += name;
    out += ">\n";
  }
  return out;
}

void to_json(nlohmann::json& j, const RawResponseRecord& record) {
  j = nlohmann::json{{"qa_id", record.qa_id},
                     {"purpose", to_string(record.purpose)},
                     {"attempt", record.attempt},
                     {"text", record.response.text},
                     {"model_id", record.response.model_id},
                     {"latency_ms", record.response.latency_ms}};
  if (record.response.token_usage) {
    j["token_usage"] = {{"prompt_tokens", record.response.token_usage->prompt_tokens},
                        {"completion_tokens", record.response.token_usage->completion_tokens}};
  }
}

void from_json(const nlohmann::json& j, RawResponseRecord& record) {
  try {
    record.qa_id = j.at("qa_id").get<std::string>();
    auto purpose = parse_request_purpose(j.at("purpose").get<std::string>());
    if (!purpose) throw Error(ErrorCode::kValidation, "unknown purpose");
    record.purpose = *purpose;
    record.attempt = j.at("attempt").get<int>();
    record.response.text = j.at("text").get<std::string>();
    record.response.model_id = j.at("model_id").get<std::string>();
    record.response.latency_ms = j.at("latency_ms").get<std::int64_t>();
    if (auto it = j.find("token_usage"); it != j.end() && it->is_object()) {
      record.response.token_usage =
          TokenUsage{it->at("prompt_tokens").get<std::int64_t>(),
                     it->at("completion_tokens").get<std::int64_t>()};
    } else {
      record.response.token_usage.reset();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("raw response record: ") + e.what());
  }
}

// -- judge ---------------------------------------------------------------------

Judge::Judge(JudgeConfig config, std::shared_ptr<ChatTransport> transport, Clock clock)
    : config_(std::move(config)),
      client_(std::move(transport), config_.max_retries, config_.backoff_base),
      clock_(std::move(clock)) {
  auto violations = validate(config_);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid judge config: " + violations.front().path + ": " +
                    violations.front().message);
  }
}

RawJudgeResponse Judge::send_logged(const ChatRequest& request,
                                    std::vector<RawResponseRecord>& log) const {
  RawResponseRecord record;
  record.qa_id = request.qa_id;
  record.purpose = request.purpose;
  record.attempt = request.attempt;
  record.response = client_.send(request);
  if (sink_) {
    std::lock_guard lock(sink_mutex_);
    sink_(record);
  }
  log.push_back(record);
  return record.response;
}

namespace {

// An answer always yields at least one assertion of its own; a reply made
// only of <missing> points is treated like an unparseable one.
std::vector<LegalDataPoint> parse_for_answer(std::string_view text) {
  auto ldps = parse_tagged_response(text);
  const bool any_answer_ldp = std::any_of(ldps.begin(), ldps.end(), [](const auto& ldp) {
    return ldp.tag != Tag::kMissing;
  });
  if (!any_answer_ldp) {
    throw Error(ErrorCode::kEmptyEvaluation, "response tags no data point from the answer");
  }
  return ldps;
}

bool is_parse_failure(const Error& e) {
  return e.code() == ErrorCode::kEmptyEvaluation || e.code() == ErrorCode::kMalformedTag;
}

}  // namespace

JudgeOutcome Judge::evaluate(const QAPair& qa, const ContractDoc& doc) const {
  JudgeOutcome outcome;
  outcome.evaluation = evaluate_logged(qa, doc, outcome.raw_responses);
  return outcome;
}

Evaluation Judge::evaluate_logged(const QAPair& qa, const ContractDoc& doc,
                                  std::vector<RawResponseRecord>& log) const {
  ChatRequest request;
  request.prompt = build_eval_prompt(doc, qa);
  request.qa_id = qa.id;
  request.purpose = RequestPurpose::kEvaluate;
  request.context = {{"answer", qa.answer}, {"question", qa.question}};
  if (qa.ground_truth) request.context["ground_truth"] = *qa.ground_truth;

  std::vector<LegalDataPoint> ldps;
  for (int attempt = 0;; ++attempt) {
    request.attempt = attempt;
    const auto response = send_logged(request, log);
    try {
      ldps = parse_for_answer(response.text);
      break;
    } catch (const Error& e) {
      if (!is_parse_failure(e) || attempt >= 1) throw;
      request.prompt += format_reminder();
    }
  }

  Evaluation evaluation;
  evaluation.qa_id = qa.id;
  evaluation.evaluator_id = config_.model_id;
  evaluation.evaluator_kind = Actor::kMachine;
  evaluation.ldps = std::move(ldps);
  evaluation.created_at = clock_();
  return evaluation;
}

std::vector<BatchItem> Judge::evaluate_batch(
    std::span<const QAPair> qa_pairs,
    const std::function<const ContractDoc&(const std::string&)>& contract) const {
  std::vector<BatchItem> results(qa_pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < qa_pairs.size(); i = next++) {
      BatchItem& item = results[i];
      try {
        JudgeOutcome outcome;
        outcome.evaluation =
            evaluate_logged(qa_pairs[i], contract(qa_pairs[i].contract_id), item.raw_responses);
        outcome.raw_responses = item.raw_responses;
        item.outcome = std::move(outcome);
      } catch (const Error& e) {
        item.error = e;
      } catch (const std::exception& e) {
        item.error = Error(ErrorCode::kTransport, e.what());
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config_.parallelism),
                                             std::max<std::size_t>(qa_pairs.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return results;
}

VerifyOutcome Judge::verify_chain(const Evaluation& first_pass, const ContractDoc& doc,
                                  const QAPair& qa) const {
  VerifyOutcome outcome;
  outcome.evaluation = first_pass;
  ChatRequest request;
  request.prompt = build_verify_prompt(doc, qa, first_pass);
  request.qa_id = qa.id;
  request.purpose = RequestPurpose::kVerify;
  request.context = {{"answer", qa.answer}, {"tagged_ldps", render_tagged(first_pass.ldps)}};
  try {
    for (int attempt = 0;; ++attempt) {
      request.attempt = attempt;
      const auto response = send_logged(request, outcome.raw_responses);
      try {
        outcome.evaluation.ldps = parse_for_answer(response.text);
        return outcome;
      } catch (const Error& e) {
        if (!is_parse_failure(e) || attempt >= 1) throw;
        request.prompt += format_reminder();
      }
    }
  } catch (const Error& e) {
    outcome.evaluation = first_pass;
    outcome.warning = true;
    outcome.warning_message = std::string("verification skipped: ") + e.what();
  }
  return outcome;
}

}  // namespace ldpjudge
