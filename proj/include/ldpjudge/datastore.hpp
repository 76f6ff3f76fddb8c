#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpjudge/domain.hpp"
#include "ldpjudge/judge.hpp"

namespace ldpjudge {

struct Corpus {
  std::vector<ContractDoc> contracts;
  std::vector<QAPair> qa_pairs;

  const ContractDoc& contract(const std::string& id) const;  // Error(kNotFound)
  const QAPair& qa(const std::string& id) const;             // Error(kNotFound)
  bool empty() const { return qa_pairs.empty(); }
};

/// Reads `dir`/contracts.jsonl and `dir`/qa.jsonl. Every failure is
/// Error(kValidation) with details {file, line}: malformed JSON, schema
/// violations, duplicate ids, and QA pairs naming an unknown contract.
Corpus load_corpus(const std::filesystem::path& dir);

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// -- released-LDP import ---------------------------------------------------------

struct ImportIssue {
  std::size_t line = 0;
  std::string message;
};

struct LegalBenchImport {
  Corpus corpus;
  std::vector<Evaluation> human_evaluations;
  std::vector<ImportIssue> errors;     // records that could not be mapped
  std::vector<nlohmann::json> sidecar; // {line, qa_id, fields} with unmapped fields
  std::vector<std::string> warnings;
};

/// Adapter from released LDP records (one JSON object per line) to domain
/// types. Field names are matched against the alias table below, first match
/// wins; fields outside the table land in the sidecar.
///
///   QAPair.id            id, qa_id, question_id
///   QAPair.contract_id   contract_id, document_id, doc_id   (default "<qa id>-contract")
///   ContractDoc.text     contract, contract_text, document, context
///   ContractDoc.type     contract_type, category, doc_type  (default "unknown")
///   QAPair.question      question, query
///   QAPair.answer        answer, response, generated_answer
///   QAPair.ground_truth  ground_truth, gold_answer, reference_answer
///   Evaluation.ldps      ldps, legal_data_points, data_points
///     LDP text           text, ldp, content
///     LDP tag            tag, label  (tag names, or colors red/green/orange/grey)
///     LDP citation       citation, paragraph, source_paragraph
///   evaluator_id         annotator, reviewer_id             (default "legalbench-release")
///   created_at           created_at                         (default 1970-01-01T00:00:00Z)
///
/// A record whose contract text is absent reuses the text of an earlier
/// record with the same contract id.
LegalBenchImport import_legalbench_ldp(const std::filesystem::path& path);

// -- runs --------------------------------------------------------------------------

struct RunManifest {
  std::string run_id;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> input_digests;     // logical name -> sha256
  std::string created_at;
  std::map<std::string, std::string> artifact_digests;  // relative path -> sha256

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

nlohmann::json to_json_value(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

/// First 16 hex digits of sha256 over the canonical JSON of config and input digests.
std::string compute_run_id(const nlohmann::json& config,
                           const std::map<std::string, std::string>& input_digests);

/// Digest of a corpus directory's two files, keyed "contracts" and "qa".
std::map<std::string, std::string> corpus_digests(const std::filesystem::path& dir);

struct LoadedRun {
  RunManifest manifest;
  std::vector<Evaluation> evaluations;
  std::vector<RawResponseRecord> raw_responses;
  std::vector<HumanReview> reviews;
  std::map<std::string, std::string> reports;  // relative path -> content
};

/// Content-addressed run directories: <root>/<run_id>/{manifest.json,
/// evaluations.jsonl, raw_responses.jsonl, reviews.jsonl, reports/...}.
/// One writer per run directory; readers verify every digest they touch.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;
  bool exists(const std::string& run_id) const;

  /// Creates the run when absent; an existing run keeps its manifest.
  RunManifest open_or_create(const nlohmann::json& config,
                             const std::map<std::string, std::string>& input_digests,
                             const std::string& created_at);

  /// Error(kNotFound) for an unknown run.
  RunManifest load_manifest(const std::string& run_id) const;

  /// Writes the file and records its digest in the manifest.
  void write_artifact(const std::string& run_id, const std::string& relative,
                      const std::string& content);
  bool has_artifact(const std::string& run_id, const std::string& relative) const;
  /// Error(kNotFound) when unrecorded, Error(kDigestMismatch) when the bytes
  /// on disk no longer match the manifest.
  std::string read_artifact(const std::string& run_id, const std::string& relative) const;

  void persist(const std::string& run_id, const std::vector<Evaluation>& evaluations,
               const std::vector<RawResponseRecord>& raw_responses,
               const std::vector<HumanReview>& reviews);

  /// Verifies every recorded digest and decodes the record files present.
  LoadedRun load_run(const std::string& run_id) const;

  std::vector<Evaluation> evaluations(const std::string& run_id) const;
  std::vector<HumanReview> reviews(const std::string& run_id) const;

 private:
  void save_manifest(const RunManifest& manifest);
  std::filesystem::path root_;
};

inline constexpr const char* kEvaluationsFile = "evaluations.jsonl";
inline constexpr const char* kRawResponsesFile = "raw_responses.jsonl";
inline constexpr const char* kReviewsFile = "reviews.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

}  // namespace ldpjudge
