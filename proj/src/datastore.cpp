#include "ldpjudge/datastore.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "ldpjudge/digest.hpp"
#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"

namespace ldpjudge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void line_error(const std::string& file, std::size_t line, const std::string& what,
                             json extra = json::object()) {
  extra["file"] = file;
  extra["line"] = line;
  throw Error(ErrorCode::kValidation, fmt::format("{}:{}: {}", file, line, what), extra);
}

template <typename T>
std::vector<T> decode_lines(const std::vector<JsonLine>& lines, const std::string& file) {
  std::vector<T> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    T record;
    try {
      record = line.value.get<T>();
    } catch (const Error& e) {
      line_error(file, line.line_number, e.what());
    } catch (const json::exception& e) {
      line_error(file, line.line_number, e.what());
    }
    if constexpr (!std::is_same_v<T, RawResponseRecord>) {
      if (auto violations = validate(record); !violations.empty()) {
        line_error(file, line.line_number,
                   violations.front().path + ": " + violations.front().message,
                   {{"path", violations.front().path}});
      }
    }
    out.push_back(std::move(record));
  }
  return out;
}

void check_run_id(const std::string& run_id) {
  const bool ok = !run_id.empty() && std::all_of(run_id.begin(), run_id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "malformed run id", {{"run_id", run_id}});
}

void check_relative(const std::string& relative) {
  const fs::path p(relative);
  bool ok = !relative.empty() && p.is_relative();
  for (const auto& part : p) ok = ok && part != "..";
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "artifact path must stay inside the run",
                       {{"path", relative}});
}

// -- import alias table ----------------------------------------------------------

const json* first_of(const json& record, std::initializer_list<const char*> names,
                     std::set<std::string>& consumed) {
  const json* found = nullptr;
  for (const char* name : names) {
    auto it = record.find(name);
    if (it == record.end()) continue;
    consumed.insert(name);
    if (!found && !it->is_null()) found = &*it;
  }
  return found;
}

std::optional<std::string> string_field(const json& record,
                                        std::initializer_list<const char*> names,
                                        std::set<std::string>& consumed) {
  const json* v = first_of(record, names, consumed);
  if (!v) return std::nullopt;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return std::to_string(v->get<long long>());
  throw Error(ErrorCode::kValidation, fmt::format("field '{}' is not a string", *names.begin()));
}

std::optional<Tag> import_tag(const std::string& name) {
  if (auto tag = parse_tag(name)) return tag;
  const std::string lowered = to_lower_ascii(trim(name));
  if (lowered == "red") return Tag::kIncorrect;
  if (lowered == "green") return Tag::kCorrect;
  if (lowered == "orange") return Tag::kIrrelevant;
  if (lowered == "grey" || lowered == "gray") return Tag::kMissing;
  return std::nullopt;
}

}  // namespace

const ContractDoc& Corpus::contract(const std::string& id) const {
  for (const auto& c : contracts) {
    if (c.id == id) return c;
  }
  throw Error(ErrorCode::kNotFound, "unknown contract " + id, {{"contract_id", id}});
}

const QAPair& Corpus::qa(const std::string& id) const {
  for (const auto& q : qa_pairs) {
    if (q.id == id) return q;
  }
  throw Error(ErrorCode::kNotFound, "unknown qa pair " + id, {{"qa_id", id}});
}

Corpus load_corpus(const fs::path& dir) {
  Corpus corpus;
  const auto contracts_path = dir / "contracts.jsonl";
  const auto qa_path = dir / "qa.jsonl";
  const auto contract_lines = read_jsonl(contracts_path);
  corpus.contracts = decode_lines<ContractDoc>(contract_lines, "contracts.jsonl");
  std::set<std::string> contract_ids;
  for (std::size_t i = 0; i < corpus.contracts.size(); ++i) {
    if (!contract_ids.insert(corpus.contracts[i].id).second) {
      line_error("contracts.jsonl", contract_lines[i].line_number,
                 "duplicate contract id " + corpus.contracts[i].id);
    }
  }
  const auto qa_lines = read_jsonl(qa_path);
  corpus.qa_pairs = decode_lines<QAPair>(qa_lines, "qa.jsonl");
  std::set<std::string> qa_ids;
  for (std::size_t i = 0; i < corpus.qa_pairs.size(); ++i) {
    const auto& qa = corpus.qa_pairs[i];
    if (!qa_ids.insert(qa.id).second) {
      line_error("qa.jsonl", qa_lines[i].line_number, "duplicate qa id " + qa.id);
    }
    if (!contract_ids.count(qa.contract_id)) {
      line_error("qa.jsonl", qa_lines[i].line_number,
                 fmt::format("qa {} names unknown contract {}", qa.id, qa.contract_id),
                 {{"contract_id", qa.contract_id}});
    }
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  write_file(dir / "contracts.jsonl", to_jsonl(corpus.contracts));
  write_file(dir / "qa.jsonl", to_jsonl(corpus.qa_pairs));
}

LegalBenchImport import_legalbench_ldp(const fs::path& path) {
  LegalBenchImport out;
  const auto lines = read_jsonl(path);
  if (lines.empty()) {
    out.warnings.push_back(path.filename().string() + " holds no records; the corpus is empty");
    return out;
  }
  std::map<std::string, std::size_t> contract_index;
  std::set<std::string> qa_ids;
  for (const auto& line : lines) {
    const json& record = line.value;
    try {
      if (!record.is_object()) throw Error(ErrorCode::kValidation, "record is not a JSON object");
      std::set<std::string> consumed;
      QAPair qa;
      qa.id = string_field(record, {"id", "qa_id", "question_id"}, consumed).value_or("");
      if (qa.id.empty()) throw Error(ErrorCode::kValidation, "record has no id");
      qa.contract_id = string_field(record, {"contract_id", "document_id", "doc_id"}, consumed)
                           .value_or(qa.id + "-contract");
      const auto contract_text =
          string_field(record, {"contract", "contract_text", "document", "context"}, consumed);
      const auto contract_type =
          string_field(record, {"contract_type", "category", "doc_type"}, consumed);
      qa.question = string_field(record, {"question", "query"}, consumed).value_or("");
      qa.answer =
          string_field(record, {"answer", "response", "generated_answer"}, consumed).value_or("");
      qa.ground_truth =
          string_field(record, {"ground_truth", "gold_answer", "reference_answer"}, consumed);

      Evaluation evaluation;
      evaluation.qa_id = qa.id;
      evaluation.evaluator_kind = Actor::kHuman;
      evaluation.evaluator_id = string_field(record, {"annotator", "reviewer_id"}, consumed)
                                    .value_or("legalbench-release");
      evaluation.created_at =
          string_field(record, {"created_at"}, consumed).value_or("1970-01-01T00:00:00Z");
      const json* ldps = first_of(record, {"ldps", "legal_data_points", "data_points"}, consumed);
      if (!ldps || !ldps->is_array()) throw Error(ErrorCode::kValidation, "record has no LDP list");
      for (std::size_t k = 0; k < ldps->size(); ++k) {
        const json& item = (*ldps)[k];
        if (!item.is_object()) {
          throw Error(ErrorCode::kValidation, fmt::format("ldps[{}] is not an object", k));
        }
        std::set<std::string> ldp_consumed;
        LegalDataPoint ldp;
        ldp.source = Actor::kHuman;
        ldp.text = string_field(item, {"text", "ldp", "content"}, ldp_consumed).value_or("");
        const auto tag_name = string_field(item, {"tag", "label"}, ldp_consumed);
        const auto tag = tag_name ? import_tag(*tag_name) : std::nullopt;
        if (!tag) {
          throw Error(ErrorCode::kValidation,
                      fmt::format("ldps[{}] has unknown tag '{}'", k, tag_name.value_or("")));
        }
        ldp.tag = *tag;
        ldp.citation =
            string_field(item, {"citation", "paragraph", "source_paragraph"}, ldp_consumed);
        if (!ldp.citation) ldp.citation = extract_citation(ldp.text);
        evaluation.ldps.push_back(std::move(ldp));
      }

      if (auto v = validate(qa); !v.empty()) {
        throw Error(ErrorCode::kValidation, v.front().path + ": " + v.front().message);
      }
      if (auto v = validate(evaluation, qa); !v.empty()) {
        throw Error(ErrorCode::kValidation, v.front().path + ": " + v.front().message);
      }
      if (qa_ids.count(qa.id)) throw Error(ErrorCode::kValidation, "duplicate id " + qa.id);

      auto known = contract_index.find(qa.contract_id);
      if (known == contract_index.end()) {
        if (!contract_text || trim(*contract_text).empty()) {
          throw Error(ErrorCode::kValidation, "contract text missing for " + qa.contract_id);
        }
        contract_index.emplace(qa.contract_id, out.corpus.contracts.size());
        out.corpus.contracts.push_back(
            {qa.contract_id, contract_type.value_or("unknown"), *contract_text});
      } else if (contract_text && *contract_text != out.corpus.contracts[known->second].text) {
        throw Error(ErrorCode::kValidation,
                    "contract " + qa.contract_id + " appears with two different texts");
      }

      json unknown = json::object();
      for (const auto& [key, value] : record.items()) {
        if (!consumed.count(key)) unknown[key] = value;
      }
      if (!unknown.empty()) {
        out.sidecar.push_back({{"line", line.line_number}, {"qa_id", qa.id}, {"fields", unknown}});
      }
      qa_ids.insert(qa.id);
      out.corpus.qa_pairs.push_back(std::move(qa));
      out.human_evaluations.push_back(std::move(evaluation));
    } catch (const Error& e) {
      out.errors.push_back({line.line_number, e.what()});
    }
  }
  return out;
}

// -- manifest -------------------------------------------------------------------

json to_json_value(const RunManifest& manifest) {
  return {{"run_id", manifest.run_id},
          {"config", manifest.config},
          {"input_digests", manifest.input_digests},
          {"created_at", manifest.created_at},
          {"artifact_digests", manifest.artifact_digests}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.config = j.at("config");
    m.input_digests = j.at("input_digests").get<std::map<std::string, std::string>>();
    m.created_at = j.at("created_at").get<std::string>();
    m.artifact_digests = j.at("artifact_digests").get<std::map<std::string, std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed manifest: ") + e.what());
  }
}

std::string compute_run_id(const json& config,
                           const std::map<std::string, std::string>& input_digests) {
  const json canonical = {{"config", config}, {"input_digests", input_digests}};
  return sha256_hex(canonical.dump()).substr(0, 16);
}

std::map<std::string, std::string> corpus_digests(const fs::path& dir) {
  return {{"contracts", sha256_file(dir / "contracts.jsonl")},
          {"qa", sha256_file(dir / "qa.jsonl")}};
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {}

fs::path RunStore::run_dir(const std::string& run_id) const {
  check_run_id(run_id);
  return root_ / run_id;
}

bool RunStore::exists(const std::string& run_id) const {
  return fs::exists(run_dir(run_id) / kManifestFile);
}

RunManifest RunStore::open_or_create(const json& config,
                                     const std::map<std::string, std::string>& input_digests,
                                     const std::string& created_at) {
  const std::string run_id = compute_run_id(config, input_digests);
  if (exists(run_id)) return load_manifest(run_id);
  RunManifest manifest;
  manifest.run_id = run_id;
  manifest.config = config;
  manifest.input_digests = input_digests;
  manifest.created_at = created_at;
  save_manifest(manifest);
  return manifest;
}

RunManifest RunStore::load_manifest(const std::string& run_id) const {
  const auto path = run_dir(run_id) / kManifestFile;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kNotFound, "no run " + run_id + " under " + root_.string(),
                {{"run_id", run_id}});
  }
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kValidation, std::string("manifest is not JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

void RunStore::save_manifest(const RunManifest& manifest) {
  write_file(run_dir(manifest.run_id) / kManifestFile, to_json_value(manifest).dump(2) + "\n");
}

void RunStore::write_artifact(const std::string& run_id, const std::string& relative,
                              const std::string& content) {
  check_relative(relative);
  RunManifest manifest = load_manifest(run_id);
  write_file(run_dir(run_id) / relative, content);
  manifest.artifact_digests[fs::path(relative).generic_string()] = sha256_hex(content);
  save_manifest(manifest);
}

bool RunStore::has_artifact(const std::string& run_id, const std::string& relative) const {
  return load_manifest(run_id).artifact_digests.count(fs::path(relative).generic_string()) > 0;
}

std::string RunStore::read_artifact(const std::string& run_id, const std::string& relative) const {
  check_relative(relative);
  const RunManifest manifest = load_manifest(run_id);
  const auto key = fs::path(relative).generic_string();
  auto it = manifest.artifact_digests.find(key);
  if (it == manifest.artifact_digests.end()) {
    throw Error(ErrorCode::kNotFound, "run " + run_id + " has no artifact " + key,
                {{"run_id", run_id}, {"path", key}});
  }
  const auto path = run_dir(run_id) / relative;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kDigestMismatch, "artifact " + key + " was deleted",
                {{"run_id", run_id}, {"path", key}});
  }
  std::string content = read_file(path);
  const std::string actual = sha256_hex(content);
  if (actual != it->second) {
    throw Error(ErrorCode::kDigestMismatch, "artifact " + key + " does not match its digest",
                {{"run_id", run_id}, {"path", key}, {"expected", it->second}, {"actual", actual}});
  }
  return content;
}

void RunStore::persist(const std::string& run_id, const std::vector<Evaluation>& evaluations,
                       const std::vector<RawResponseRecord>& raw_responses,
                       const std::vector<HumanReview>& reviews) {
  write_artifact(run_id, kEvaluationsFile, to_jsonl(evaluations));
  write_artifact(run_id, kRawResponsesFile, to_jsonl(raw_responses));
  write_artifact(run_id, kReviewsFile, to_jsonl(reviews));
}

LoadedRun RunStore::load_run(const std::string& run_id) const {
  LoadedRun run;
  run.manifest = load_manifest(run_id);
  for (const auto& [relative, _] : run.manifest.artifact_digests) {
    const std::string content = read_artifact(run_id, relative);
    if (relative == kEvaluationsFile) {
      run.evaluations = decode_lines<Evaluation>(parse_jsonl(content, relative), relative);
    } else if (relative == kRawResponsesFile) {
      run.raw_responses = decode_lines<RawResponseRecord>(parse_jsonl(content, relative), relative);
    } else if (relative == kReviewsFile) {
      run.reviews = decode_lines<HumanReview>(parse_jsonl(content, relative), relative);
    } else {
      run.reports.emplace(relative, content);
    }
  }
  return run;
}

std::vector<Evaluation> RunStore::evaluations(const std::string& run_id) const {
  const std::string content = read_artifact(run_id, kEvaluationsFile);
  return decode_lines<Evaluation>(parse_jsonl(content, kEvaluationsFile), kEvaluationsFile);
}

std::vector<HumanReview> RunStore::reviews(const std::string& run_id) const {
  if (!has_artifact(run_id, kReviewsFile)) return {};
  const std::string content = read_artifact(run_id, kReviewsFile);
  return decode_lines<HumanReview>(parse_jsonl(content, kReviewsFile), kReviewsFile);
}

}  // namespace ldpjudge
