#include "ldpjudge/transport.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"

namespace ldpjudge {

std::string_view to_string(RequestPurpose purpose) {
  switch (purpose) {
    case RequestPurpose::kEvaluate: return "evaluate";
    case RequestPurpose::kVerify: return "verify";
    case RequestPurpose::kIncompleteInfo: return "incomplete_info";
    case RequestPurpose::kChangeValue: return "change_value";
    case RequestPurpose::kAddExtraInfo: return "add_extra_info";
    case RequestPurpose::kContradictingInfo: return "contradicting_info";
  }
  return "evaluate";
}

std::optional<RequestPurpose> parse_request_purpose(std::string_view name) {
  for (auto p : {RequestPurpose::kEvaluate, RequestPurpose::kVerify,
                 RequestPurpose::kIncompleteInfo, RequestPurpose::kChangeValue,
                 RequestPurpose::kAddExtraInfo, RequestPurpose::kContradictingInfo}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool at_end = i + 1 == text.size();
    if (at_end || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      auto sentence = trim(text.substr(start, i + 1 - start));
      if (!sentence.empty()) out.push_back(std::move(sentence));
      start = i + 1;
    }
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

ScriptedTransport::ScriptedTransport(Responder responder, std::string model_id)
    : responder_(std::move(responder)), model_id_(std::move(model_id)) {}

RawJudgeResponse ScriptedTransport::complete(const ChatRequest& request) {
  ++calls_;
  RawJudgeResponse response;
  response.text = responder_(request);
  response.model_id = model_id_;
  response.latency_ms = 0;
  return response;
}

namespace {

std::string context_value(const ChatRequest& request, const std::string& key) {
  auto it = request.context.find(key);
  return it == request.context.end() ? std::string() : it->second;
}

std::string lower_first(std::string text) {
  if (!text.empty()) text[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(text[0])));
  return text;
}

bool all_digits(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Keeps the first half of the words so the span loses detail.
std::string truncate_span(const std::string& span) {
  std::vector<std::string> words;
  std::string word;
  for (char c : span) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!word.empty()) words.push_back(std::move(word));
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) words.push_back(std::move(word));
  if (words.size() < 2) return {};
  const std::size_t keep = (words.size() + 1) / 2;
  std::string out;
  for (std::size_t i = 0; i < keep; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back()))) out.pop_back();
  return out + ".";
}

constexpr const char* kExtraSentences[] = {
    "Either party may terminate this agreement on ninety days written notice.",
    "Any dispute must first be referred to binding arbitration in London.",
    "The supplier is entitled to a late payment fee of five percent per month.",
};

}  // namespace

std::string mock_response(const ChatRequest& request) {
  switch (request.purpose) {
    case RequestPurpose::kEvaluate: {
      std::string out;
      for (const auto& sentence : split_sentences(context_value(request, "answer"))) {
        out += "<correct>" + sentence + "</correct>\n";
      }
      return out;
    }
    case RequestPurpose::kVerify:
      return context_value(request, "tagged_ldps");
    case RequestPurpose::kIncompleteInfo:
      return truncate_span(context_value(request, "span"));
    case RequestPurpose::kChangeValue: {
      const std::string value = context_value(request, "value");
      if (all_digits(value)) {
        const long long n = std::stoll(value);
        return std::to_string(n > 15 ? n - 15 : n + 15);
      }
      return value == "Delaware" ? "Texas" : "Delaware";
    }
    case RequestPurpose::kAddExtraInfo: {
      const std::string answer = context_value(request, "answer");
      return kExtraSentences[answer.size() % std::size(kExtraSentences)];
    }
    case RequestPurpose::kContradictingInfo: {
      std::string out;
      for (const auto& sentence : split_sentences(context_value(request, "ground_truth"))) {
        out += "Contrary to the agreement, it is not the case that " + lower_first(sentence) + "\n";
      }
      return out;
    }
  }
  return {};
}

JudgeScript JudgeScript::load(const std::filesystem::path& path) {
  JudgeScript script;
  for (const auto& line : read_jsonl(path)) {
    const auto& j = line.value;
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kValidation,
                  path.filename().string() + ":" + std::to_string(line.line_number) + ": " + what,
                  {{"line", line.line_number}});
    };
    if (!j.is_object() || !j.contains("qa_id") || !j["qa_id"].is_string()) fail("qa_id missing");
    auto purpose = parse_request_purpose(j.value("purpose", std::string("evaluate")));
    if (!purpose) fail("unknown purpose");
    if (!j.contains("responses") || !j["responses"].is_array() || j["responses"].empty()) {
      fail("responses must be a non-empty array");
    }
    auto& slot = script.responses[{j["qa_id"].get<std::string>(), *purpose}];
    for (const auto& r : j["responses"]) {
      if (!r.is_string()) fail("responses must be strings");
      slot.push_back(r.get<std::string>());
    }
  }
  return script;
}

Responder JudgeScript::responder(Responder fallback) const {
  return [responses = responses, fallback = std::move(fallback)](const ChatRequest& request) {
    auto it = responses.find({request.qa_id, request.purpose});
    if (it == responses.end()) return fallback(request);
    const auto& list = it->second;
    const auto index = std::min<std::size_t>(static_cast<std::size_t>(request.attempt),
                                             list.size() - 1);
    return list[index];
  };
}

}  // namespace ldpjudge
