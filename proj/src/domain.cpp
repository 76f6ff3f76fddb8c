#include "ldpjudge/domain.hpp"

#include <algorithm>
#include <cctype>

#include "ldpjudge/error.hpp"

namespace ldpjudge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kValidation: return "validation_failed";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kPrecondition: return "precondition_failed";
    case ErrorCode::kEmptyEvaluation: return "empty_evaluation";
    case ErrorCode::kMalformedTag: return "malformed_tag";
    case ErrorCode::kTransport: return "transport_error";
    case ErrorCode::kAuthentication: return "authentication_failed";
    case ErrorCode::kProviderResponse: return "provider_response";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorCode::kDigestMismatch: return "digest_mismatch";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto begin = std::find_if_not(text.begin(), text.end(), is_space);
  auto end = std::find_if_not(text.rbegin(), std::string_view::reverse_iterator(begin), is_space);
  return std::string(begin, end.base());
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view to_string(Tag tag) {
  switch (tag) {
    case Tag::kCorrect: return "correct";
    case Tag::kIncorrect: return "incorrect";
    case Tag::kIrrelevant: return "irrelevant";
    case Tag::kMissing: return "missing";
  }
  return "correct";
}

std::optional<Tag> parse_tag(std::string_view name) {
  const std::string lowered = to_lower_ascii(trim(name));
  for (Tag tag : kAllTags) {
    if (lowered == to_string(tag)) return tag;
  }
  return std::nullopt;
}

std::string_view to_string(Actor actor) {
  return actor == Actor::kMachine ? "machine" : "human";
}

std::optional<Actor> parse_actor(std::string_view name) {
  const std::string lowered = to_lower_ascii(trim(name));
  if (lowered == "machine") return Actor::kMachine;
  if (lowered == "human") return Actor::kHuman;
  return std::nullopt;
}

std::string_view to_string(ReviewMode mode) {
  return mode == ReviewMode::kManual ? "manual" : "ldp_guided";
}

std::optional<ReviewMode> parse_review_mode(std::string_view name) {
  const std::string lowered = to_lower_ascii(trim(name));
  if (lowered == "manual") return ReviewMode::kManual;
  if (lowered == "ldp_guided") return ReviewMode::kLdpGuided;
  return std::nullopt;
}

std::int64_t& TagCounts::operator[](Tag tag) {
  switch (tag) {
    case Tag::kCorrect: return n_correct;
    case Tag::kIncorrect: return n_incorrect;
    case Tag::kIrrelevant: return n_irrelevant;
    case Tag::kMissing: return n_missing;
  }
  return n_correct;
}

std::int64_t TagCounts::operator[](Tag tag) const {
  return const_cast<TagCounts&>(*this)[tag];
}

TagCounts tag_counts(const std::vector<LegalDataPoint>& ldps) {
  TagCounts counts;
  for (const auto& ldp : ldps) ++counts[ldp.tag];
  return counts;
}

TagCounts tag_counts(const Evaluation& evaluation) { return tag_counts(evaluation.ldps); }

bool is_iso8601_utc(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20) return false;
  constexpr std::string_view shape = "dddd-dd-ddTdd:dd:ddZ";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 'd') {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    } else if (text[i] != shape[i]) {
      return false;
    }
  }
  auto field = [&](std::size_t pos, std::size_t len) {
    return std::stoi(std::string(text.substr(pos, len)));
  };
  const int month = field(5, 2), day = field(8, 2);
  const int hour = field(11, 2), minute = field(14, 2), second = field(17, 2);
  return month >= 1 && month <= 12 && day >= 1 && day <= 31 && hour <= 23 &&
         minute <= 59 && second <= 60;
}

namespace {

std::string join_path(std::string_view prefix, std::string_view field) {
  if (prefix.empty()) return std::string(field);
  return std::string(prefix) + "." + std::string(field);
}

bool blank(std::string_view text) { return trim(text).empty(); }

// Case-insensitive find; npos when absent.
std::size_t find_icase(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::string_view::npos;
  const std::string h = to_lower_ascii(haystack);
  const std::string n = to_lower_ascii(needle);
  return h.find(n);
}

}  // namespace

Violations validate(const LegalDataPoint& ldp, std::string_view path) {
  Violations out;
  if (blank(ldp.text)) out.push_back({join_path(path, "text"), "text non-empty"});
  if (ldp.citation && blank(*ldp.citation)) {
    out.push_back({join_path(path, "citation"), "citation non-empty when present"});
  }
  return out;
}

Violations validate(const ContractDoc& doc) {
  Violations out;
  if (blank(doc.id)) out.push_back({"id", "id non-empty"});
  if (blank(doc.text)) out.push_back({"text", "text non-empty"});
  return out;
}

Violations validate(const QAPair& qa) {
  Violations out;
  if (blank(qa.id)) out.push_back({"id", "id non-empty"});
  if (blank(qa.contract_id)) out.push_back({"contract_id", "contract_id non-empty"});
  if (blank(qa.answer)) out.push_back({"answer", "answer non-empty"});
  return out;
}

Violations validate(const Evaluation& evaluation) {
  Violations out;
  if (blank(evaluation.qa_id)) out.push_back({"qa_id", "qa_id non-empty"});
  if (blank(evaluation.evaluator_id)) out.push_back({"evaluator_id", "evaluator_id non-empty"});
  if (!is_iso8601_utc(evaluation.created_at)) {
    out.push_back({"created_at", "created_at is an ISO-8601 UTC timestamp"});
  }
  if (evaluation.ldps.empty()) out.push_back({"ldps", "ldps non-empty"});
  for (std::size_t i = 0; i < evaluation.ldps.size(); ++i) {
    const auto& ldp = evaluation.ldps[i];
    const std::string path = "ldps[" + std::to_string(i) + "]";
    auto nested = validate(ldp, path);
    out.insert(out.end(), nested.begin(), nested.end());
    if (ldp.tag != Tag::kMissing && ldp.source != evaluation.evaluator_kind) {
      out.push_back({path + ".source", "source matches evaluator_kind"});
    }
  }
  return out;
}

Violations validate(const Evaluation& evaluation, const QAPair& qa) {
  Violations out = validate(evaluation);
  if (evaluation.qa_id != qa.id) out.push_back({"qa_id", "qa_id matches the QA pair"});
  std::size_t last_pos = 0;
  for (std::size_t i = 0; i < evaluation.ldps.size(); ++i) {
    const auto& ldp = evaluation.ldps[i];
    const std::string path = "ldps[" + std::to_string(i) + "]";
    const std::string text = trim(ldp.text);
    if (text.empty()) continue;
    const std::size_t pos = find_icase(qa.answer, text);
    if (ldp.tag == Tag::kMissing) {
      if (qa.answer.find(text) != std::string::npos) {
        out.push_back({path + ".text", "missing LDP does not quote the answer verbatim"});
      }
      continue;
    }
    // Only LDPs that can be located in the answer constrain the ordering.
    if (pos == std::string::npos) continue;
    if (pos < last_pos) {
      out.push_back({path, "non-missing LDPs follow answer order"});
    }
    last_pos = pos;
  }
  return out;
}

Violations validate(const TagCounts& counts) {
  Violations out;
  for (Tag tag : kAllTags) {
    if (counts[tag] < 0) {
      out.push_back({"n_" + std::string(to_string(tag)), "count non-negative"});
    }
  }
  return out;
}

Violations validate(const ScoreSet& scores) {
  Violations out;
  auto in_range = [&](const std::optional<double>& value, const char* name) {
    if (value && !(*value >= 0.0 && *value <= 1.0)) out.push_back({name, "value in [0,1]"});
  };
  in_range(scores.correctness, "correctness");
  in_range(scores.precision, "precision");
  in_range(scores.recall, "recall");
  in_range(scores.f1, "f1");
  if (scores.f1 && !(scores.precision && scores.recall)) {
    out.push_back({"f1", "f1 present only if precision and recall present"});
  }
  return out;
}

Violations validate(const HumanReview& review) {
  Violations out;
  if (blank(review.qa_id)) out.push_back({"qa_id", "qa_id non-empty"});
  if (blank(review.reviewer_id)) out.push_back({"reviewer_id", "reviewer_id non-empty"});
  auto grade_ok = [](const std::optional<int>& g) { return !g || (*g >= 1 && *g <= 5); };
  if (!grade_ok(review.correctness_grade)) {
    out.push_back({"correctness_grade", "grade in 1..5"});
  }
  if (!grade_ok(review.relevance_grade)) out.push_back({"relevance_grade", "grade in 1..5"});
  if (review.mode == ReviewMode::kManual) {
    if (!review.correctness_grade || !review.relevance_grade) {
      out.push_back({"mode", "manual review carries both grades"});
    }
    if (review.evaluation) out.push_back({"evaluation", "manual review carries no evaluation"});
  } else {
    if (!review.evaluation) {
      out.push_back({"evaluation", "ldp_guided review carries an evaluation"});
    } else {
      for (auto& v : validate(*review.evaluation)) {
        out.push_back({"evaluation." + v.path, v.message});
      }
      if (review.evaluation->qa_id != review.qa_id) {
        out.push_back({"evaluation.qa_id", "evaluation refers to the reviewed QA pair"});
      }
    }
  }
  return out;
}

}  // namespace ldpjudge
