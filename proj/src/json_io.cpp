#include "ldpjudge/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ldpjudge/error.hpp"

namespace ldpjudge {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kValidation, "field '" + field + "': " + what, {{"field", field}});
}

const json& require(const json& j, const char* field) {
  if (!j.is_object()) field_error(field, "record is not a JSON object");
  auto it = j.find(field);
  if (it == j.end()) field_error(field, "required field missing");
  return *it;
}

std::string require_string(const json& j, const char* field) {
  const json& v = require(j, field);
  if (!v.is_string()) field_error(field, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) field_error(field, "expected a string or null");
  return it->get<std::string>();
}

std::optional<int> optional_int(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) field_error(field, "expected an integer or null");
  return it->get<int>();
}

std::optional<double> optional_number(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) field_error(field, "expected a number or null");
  return it->get<double>();
}

Actor require_actor(const json& j, const char* field) {
  auto actor = parse_actor(require_string(j, field));
  if (!actor) field_error(field, "expected 'machine' or 'human'");
  return *actor;
}

void put_optional(json& j, const char* field, const std::optional<std::string>& v) {
  if (v) j[field] = *v;
}

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void to_json(json& j, Tag tag) { j = std::string(to_string(tag)); }

void from_json(const json& j, Tag& tag) {
  if (!j.is_string()) field_error("tag", "expected a string");
  auto parsed = parse_tag(j.get<std::string>());
  if (!parsed) field_error("tag", "unknown tag '" + j.get<std::string>() + "'");
  tag = *parsed;
}

void to_json(json& j, const LegalDataPoint& ldp) {
  j = json{{"text", ldp.text}, {"tag", ldp.tag}, {"source", to_string(ldp.source)}};
  put_optional(j, "citation", ldp.citation);
}

void from_json(const json& j, LegalDataPoint& ldp) {
  ldp.text = require_string(j, "text");
  require(j, "tag").get_to(ldp.tag);
  ldp.source = require_actor(j, "source");
  ldp.citation = optional_string(j, "citation");
}

void to_json(json& j, const ContractDoc& doc) {
  j = json{{"id", doc.id}, {"contract_type", doc.contract_type}, {"text", doc.text}};
}

void from_json(const json& j, ContractDoc& doc) {
  doc.id = require_string(j, "id");
  doc.contract_type = require_string(j, "contract_type");
  doc.text = require_string(j, "text");
}

void to_json(json& j, const QAPair& qa) {
  j = json{{"id", qa.id},
           {"contract_id", qa.contract_id},
           {"question", qa.question},
           {"answer", qa.answer}};
  put_optional(j, "ground_truth", qa.ground_truth);
}

void from_json(const json& j, QAPair& qa) {
  qa.id = require_string(j, "id");
  qa.contract_id = require_string(j, "contract_id");
  qa.question = require_string(j, "question");
  qa.answer = require_string(j, "answer");
  qa.ground_truth = optional_string(j, "ground_truth");
}

void to_json(json& j, const Evaluation& evaluation) {
  j = json{{"qa_id", evaluation.qa_id},
           {"evaluator_id", evaluation.evaluator_id},
           {"evaluator_kind", to_string(evaluation.evaluator_kind)},
           {"ldps", evaluation.ldps},
           {"created_at", evaluation.created_at}};
}

void from_json(const json& j, Evaluation& evaluation) {
  evaluation.qa_id = require_string(j, "qa_id");
  evaluation.evaluator_id = require_string(j, "evaluator_id");
  evaluation.evaluator_kind = require_actor(j, "evaluator_kind");
  const json& ldps = require(j, "ldps");
  if (!ldps.is_array()) field_error("ldps", "expected an array");
  evaluation.ldps.clear();
  for (std::size_t i = 0; i < ldps.size(); ++i) {
    try {
      evaluation.ldps.push_back(ldps[i].get<LegalDataPoint>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, "ldps[" + std::to_string(i) + "]: " + e.what(),
                  {{"field", "ldps[" + std::to_string(i) + "]"}});
    }
  }
  evaluation.created_at = require_string(j, "created_at");
}

void to_json(json& j, const TagCounts& counts) {
  j = json{{"n_correct", counts.n_correct},
           {"n_incorrect", counts.n_incorrect},
           {"n_irrelevant", counts.n_irrelevant},
           {"n_missing", counts.n_missing}};
}

void from_json(const json& j, TagCounts& counts) {
  for (Tag tag : kAllTags) {
    const std::string field = "n_" + std::string(to_string(tag));
    const json& v = require(j, field.c_str());
    if (!v.is_number_integer()) field_error(field, "expected an integer");
    counts[tag] = v.get<std::int64_t>();
  }
}

void to_json(json& j, const ScoreSet& scores) {
  j = json{{"correctness", optional_value(scores.correctness)},
           {"precision", optional_value(scores.precision)},
           {"recall", optional_value(scores.recall)},
           {"f1", optional_value(scores.f1)}};
}

void from_json(const json& j, ScoreSet& scores) {
  scores.correctness = optional_number(j, "correctness");
  scores.precision = optional_number(j, "precision");
  scores.recall = optional_number(j, "recall");
  scores.f1 = optional_number(j, "f1");
}

void to_json(json& j, const HumanReview& review) {
  j = json{{"qa_id", review.qa_id},
           {"reviewer_id", review.reviewer_id},
           {"mode", to_string(review.mode)}};
  if (review.correctness_grade) j["correctness_grade"] = *review.correctness_grade;
  if (review.relevance_grade) j["relevance_grade"] = *review.relevance_grade;
  if (review.evaluation) j["evaluation"] = *review.evaluation;
}

void from_json(const json& j, HumanReview& review) {
  review.qa_id = require_string(j, "qa_id");
  review.reviewer_id = require_string(j, "reviewer_id");
  auto mode = parse_review_mode(require_string(j, "mode"));
  if (!mode) field_error("mode", "expected 'manual' or 'ldp_guided'");
  review.mode = *mode;
  review.correctness_grade = optional_int(j, "correctness_grade");
  review.relevance_grade = optional_int(j, "relevance_grade");
  auto it = j.find("evaluation");
  if (it != j.end() && !it->is_null()) {
    review.evaluation = it->get<Evaluation>();
  } else {
    review.evaluation.reset();
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string(), {{"path", path.string()}});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<JsonLine> parse_jsonl(std::string_view content, const std::string& name) {
  std::vector<JsonLine> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    const auto stop = std::min(content.find('\n', start), content.size());
    const std::string_view line = content.substr(start, stop - start);
    start = stop + 1;
    ++number;
    if (trim(line).empty()) continue;
    try {
      out.push_back({number, json::parse(line)});
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kValidation, name + ":" + std::to_string(number) + ": " + e.what(),
                  {{"path", name}, {"line", number}});
    }
  }
  return out;
}

std::vector<JsonLine> read_jsonl(const std::filesystem::path& path) {
  try {
    return parse_jsonl(read_file(path), path.filename().string());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kValidation) throw;
    auto details = e.details();
    details["path"] = path.string();
    throw Error(e.code(), e.what(), details);
  }
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

template <typename T>
std::vector<T> load_jsonl(const std::filesystem::path& path) {
  std::vector<T> out;
  for (const auto& line : read_jsonl(path)) {
    try {
      out.push_back(line.value.get<T>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation,
                  path.filename().string() + ":" + std::to_string(line.line_number) + ": " +
                      e.what(),
                  {{"path", path.string()}, {"line", line.line_number}});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kValidation,
                  path.filename().string() + ":" + std::to_string(line.line_number) + ": " +
                      e.what(),
                  {{"path", path.string()}, {"line", line.line_number}});
    }
  }
  return out;
}

template std::vector<Evaluation> load_jsonl<Evaluation>(const std::filesystem::path&);
template std::vector<HumanReview> load_jsonl<HumanReview>(const std::filesystem::path&);
template std::vector<QAPair> load_jsonl<QAPair>(const std::filesystem::path&);
template std::vector<ContractDoc> load_jsonl<ContractDoc>(const std::filesystem::path&);

}  // namespace ldpjudge
