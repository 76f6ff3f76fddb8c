#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpjudge/alignment.hpp"
#include "ldpjudge/analysis.hpp"
#include "ldpjudge/datastore.hpp"
#include "ldpjudge/domain.hpp"
#include "ldpjudge/judge.hpp"

namespace ldpjudge {

enum class SessionState : std::uint8_t { kOpen, kSubmitted };
std::string_view to_string(SessionState state);

struct SubmitResult {
  HumanReview review;
  ScoreSet scores;
  AlignmentReport alignment;
};

struct AnnotationSession {
  std::string session_id;
  std::string qa_id;
  std::string reviewer_id;
  Evaluation machine_evaluation;
  std::map<std::size_t, Tag> human_tags;  // machine LDP index -> reviewer's tag
  std::vector<LegalDataPoint> added_ldps; // reviewer-added, always Missing
  SessionState state = SessionState::kOpen;
  std::int64_t version = 0;
  std::optional<SubmitResult> result;
  std::optional<std::int64_t> submitted_version;  // version the submit call carried

  std::vector<std::size_t> untagged() const;
};

struct ServiceOptions {
  AlignConfig align;
  TriageConfig triage;
  /// Where submitted reviews are written (reviews.jsonl); optional.
  std::shared_ptr<RunStore> store;
  std::string run_id;
};

/// Session state machine behind the annotation API. Sessions are isolated;
/// writes to one session are serialized by its version number.
class AnnotationService {
 public:
  AnnotationService(Corpus corpus, std::vector<Evaluation> machine_evaluations,
                    std::shared_ptr<Embedder> embedder, ServiceOptions options,
                    Clock clock = system_clock());

  /// Returns the existing session for (qa_id, reviewer_id) when there is one.
  /// Error(kNotFound) for an unknown QA pair, Error(kPrecondition) when it has
  /// no machine evaluation.
  std::pair<AnnotationSession, bool> create_session(const std::string& qa_id,
                                                    const std::string& reviewer_id);
  AnnotationSession get_session(const std::string& session_id) const;

  /// Error(kConflict) on a stale version or a submitted session;
  /// Error(kInvalidArgument) for an index outside the machine LDP list.
  AnnotationSession record_tag(const std::string& session_id, std::size_t ldp_index, Tag tag,
                               std::int64_t version);
  AnnotationSession add_missing_ldp(const std::string& session_id, const std::string& text,
                                    std::int64_t version,
                                    std::optional<std::string> citation = std::nullopt);
  /// Error(kPrecondition) listing untagged indices in details.untagged.
  /// Retrying with the version of the successful submit returns the stored result.
  std::pair<AnnotationSession, SubmitResult> submit(const std::string& session_id,
                                                    std::int64_t version);

  TriageReport triage_report(const TriageConfig& config,
                             std::optional<double> baseline_hours) const;
  const TriageConfig& default_triage() const { return options_.triage; }

  /// Reviewer-facing JSON. Machine tags appear only once the session is submitted.
  nlohmann::json session_payload(const AnnotationSession& session) const;
  static nlohmann::json submit_payload(const AnnotationSession& session,
                                       const SubmitResult& result);

 private:
  AnnotationSession& open_session_for_write(const std::string& session_id, std::int64_t version);
  void persist_reviews();

  Corpus corpus_;
  std::map<std::string, Evaluation> machine_;
  std::shared_ptr<Embedder> embedder_;
  ServiceOptions options_;
  Clock clock_;

  mutable std::shared_mutex mutex_;
  std::map<std::string, AnnotationSession> sessions_;
  std::vector<HumanReview> submitted_;  // in submission order
};

/// Deterministic session id for a (qa_id, reviewer_id) pair.
std::string session_id_for(const std::string& qa_id, const std::string& reviewer_id);

/// HTTP status for an error code: 404 not_found, 409 conflict, 422
/// precondition, 401 authentication, 400 for argument/validation errors, 500 otherwise.
int http_status_for(ErrorCode code);
nlohmann::json error_body(const Error& error);

/// REST front end. Routes:
///   POST /sessions                       {qa_id}
///   GET  /sessions/{id}
///   PUT  /sessions/{id}/ldps/{index}/tag {tag, version}
///   POST /sessions/{id}/ldps             {text, version, citation?}
///   POST /sessions/{id}/submit           {version}
///   GET  /reports/triage                 ?relevance_threshold=&baseline_hours=
///   GET  /healthz
/// Every route but /healthz needs "Authorization: Bearer <token>"; the token
/// maps to the reviewer id. Errors are {code, message, details}.
class AnnotationServer {
 public:
  AnnotationServer(std::shared_ptr<AnnotationService> service,
                   std::map<std::string, std::string> tokens);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds to `host`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ldpjudge
