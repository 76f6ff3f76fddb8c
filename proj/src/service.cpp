#include "ldpjudge/service.hpp"

#include <mutex>

#include <fmt/format.h>

#include "ldpjudge/digest.hpp"
#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"
#include "ldpjudge/metrics.hpp"

namespace ldpjudge {

using nlohmann::json;

std::string_view to_string(SessionState state) {
  return state == SessionState::kOpen ? "open" : "submitted";
}

std::vector<std::size_t> AnnotationSession::untagged() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < machine_evaluation.ldps.size(); ++i) {
    if (!human_tags.count(i)) out.push_back(i);
  }
  return out;
}

std::string session_id_for(const std::string& qa_id, const std::string& reviewer_id) {
  return "s-" + sha256_hex(qa_id + '\n' + reviewer_id).substr(0, 16);
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kPrecondition: return 422;
    case ErrorCode::kAuthentication: return 401;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kValidation:
    case ErrorCode::kMalformedTag: return 400;
    default: return 500;
  }
}

json error_body(const Error& error) {
  return {{"code", to_string(error.code())}, {"message", error.what()}, {"details", error.details()}};
}

AnnotationService::AnnotationService(Corpus corpus, std::vector<Evaluation> machine_evaluations,
                                     std::shared_ptr<Embedder> embedder, ServiceOptions options,
                                     Clock clock)
    : corpus_(std::move(corpus)),
      embedder_(std::move(embedder)),
      options_(std::move(options)),
      clock_(std::move(clock)) {
  if (!embedder_) throw Error(ErrorCode::kInvalidArgument, "service needs an embedder");
  for (auto& evaluation : machine_evaluations) {
    const std::string qa_id = evaluation.qa_id;
    machine_.insert_or_assign(qa_id, std::move(evaluation));
  }
  if (options_.store && !options_.run_id.empty()) {
    submitted_ = options_.store->reviews(options_.run_id);
  }
}

std::pair<AnnotationSession, bool> AnnotationService::create_session(
    const std::string& qa_id, const std::string& reviewer_id) {
  if (trim(reviewer_id).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "reviewer_id is required");
  }
  corpus_.qa(qa_id);  // kNotFound for unknown QA pairs
  auto machine = machine_.find(qa_id);
  if (machine == machine_.end()) {
    throw Error(ErrorCode::kPrecondition, "no machine evaluation for " + qa_id,
                {{"qa_id", qa_id}});
  }
  const std::string id = session_id_for(qa_id, reviewer_id);
  std::unique_lock lock(mutex_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return {it->second, false};
  AnnotationSession session;
  session.session_id = id;
  session.qa_id = qa_id;
  session.reviewer_id = reviewer_id;
  session.machine_evaluation = machine->second;
  sessions_.emplace(id, session);
  return {session, true};
}

AnnotationSession AnnotationService::get_session(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown session " + session_id,
                {{"session_id", session_id}});
  }
  return it->second;
}

AnnotationSession& AnnotationService::open_session_for_write(const std::string& session_id,
                                                             std::int64_t version) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown session " + session_id,
                {{"session_id", session_id}});
  }
  auto& session = it->second;
  if (session.state == SessionState::kSubmitted) {
    throw Error(ErrorCode::kConflict, "session " + session_id + " is already submitted",
                {{"session_id", session_id}, {"state", "submitted"}});
  }
  if (version != session.version) {
    throw Error(ErrorCode::kConflict,
                fmt::format("stale version {} (current {})", version, session.version),
                {{"session_id", session_id}, {"version", session.version}});
  }
  return session;
}

AnnotationSession AnnotationService::record_tag(const std::string& session_id,
                                                std::size_t ldp_index, Tag tag,
                                                std::int64_t version) {
  std::unique_lock lock(mutex_);
  auto& session = open_session_for_write(session_id, version);
  const std::size_t n = session.machine_evaluation.ldps.size();
  if (ldp_index >= n) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("ldp index {} outside 0..{}", ldp_index, n == 0 ? 0 : n - 1),
                {{"index", ldp_index}, {"ldp_count", n}});
  }
  session.human_tags[ldp_index] = tag;
  ++session.version;
  return session;
}

AnnotationSession AnnotationService::add_missing_ldp(const std::string& session_id,
                                                     const std::string& text,
                                                     std::int64_t version,
                                                     std::optional<std::string> citation) {
  std::unique_lock lock(mutex_);
  auto& session = open_session_for_write(session_id, version);
  LegalDataPoint ldp{trim(text), Tag::kMissing, Actor::kHuman, std::move(citation)};
  if (auto violations = validate(ldp); !violations.empty()) {
    throw Error(ErrorCode::kValidation, violations.front().message,
                {{"path", violations.front().path}});
  }
  session.added_ldps.push_back(std::move(ldp));
  ++session.version;
  return session;
}

std::pair<AnnotationSession, SubmitResult> AnnotationService::submit(const std::string& session_id,
                                                                     std::int64_t version) {
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it != sessions_.end() && it->second.state == SessionState::kSubmitted &&
      it->second.submitted_version == version) {
    return {it->second, *it->second.result};
  }
  auto& session = open_session_for_write(session_id, version);
  if (auto missing = session.untagged(); !missing.empty()) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("{} LDP(s) still untagged", missing.size()), {{"untagged", missing}});
  }

  Evaluation human;
  human.qa_id = session.qa_id;
  human.evaluator_id = session.reviewer_id;
  human.evaluator_kind = Actor::kHuman;
  human.created_at = clock_();
  for (std::size_t i = 0; i < session.machine_evaluation.ldps.size(); ++i) {
    const auto& machine_ldp = session.machine_evaluation.ldps[i];
    human.ldps.push_back(
        {machine_ldp.text, session.human_tags.at(i), Actor::kHuman, machine_ldp.citation});
  }
  human.ldps.insert(human.ldps.end(), session.added_ldps.begin(), session.added_ldps.end());

  SubmitResult result;
  result.review.qa_id = session.qa_id;
  result.review.reviewer_id = session.reviewer_id;
  result.review.mode = ReviewMode::kLdpGuided;
  result.review.evaluation = human;
  result.scores = compute_scores(tag_counts(human));
  result.alignment = align(session.machine_evaluation, human, *embedder_, options_.align);

  submitted_.push_back(result.review);
  try {
    persist_reviews();
  } catch (...) {
    submitted_.pop_back();
    throw;
  }
  session.state = SessionState::kSubmitted;
  session.submitted_version = version;
  ++session.version;
  session.result = result;
  return {session, result};
}

void AnnotationService::persist_reviews() {
  if (!options_.store || options_.run_id.empty()) return;
  options_.store->write_artifact(options_.run_id, kReviewsFile, to_jsonl(submitted_));
}

TriageReport AnnotationService::triage_report(const TriageConfig& config,
                                              std::optional<double> baseline_hours) const {
  std::vector<Evaluation> evaluations;
  for (const auto& [_, evaluation] : machine_) evaluations.push_back(evaluation);
  auto report = triage(score_map(evaluations), config);
  if (baseline_hours) report = time_savings(std::move(report), *baseline_hours);
  return report;
}

json AnnotationService::session_payload(const AnnotationSession& session) const {
  const QAPair& qa = corpus_.qa(session.qa_id);
  const ContractDoc& contract = corpus_.contract(qa.contract_id);
  const bool submitted = session.state == SessionState::kSubmitted;
  json ldps = json::array();
  for (std::size_t i = 0; i < session.machine_evaluation.ldps.size(); ++i) {
    const auto& ldp = session.machine_evaluation.ldps[i];
    json item = {{"index", i}, {"text", ldp.text}, {"citation", nullptr}, {"human_tag", nullptr}};
    if (ldp.citation) item["citation"] = *ldp.citation;
    if (auto tag = session.human_tags.find(i); tag != session.human_tags.end()) {
      item["human_tag"] = to_string(tag->second);
    }
    if (submitted) item["machine_tag"] = to_string(ldp.tag);
    ldps.push_back(std::move(item));
  }
  json payload = {{"session_id", session.session_id},
                  {"qa_id", session.qa_id},
                  {"reviewer_id", session.reviewer_id},
                  {"state", to_string(session.state)},
                  {"version", session.version},
                  {"question", qa.question},
                  {"answer", qa.answer},
                  {"contract", {{"id", contract.id},
                                {"contract_type", contract.contract_type},
                                {"text", contract.text}}},
                  {"ldps", ldps},
                  {"added_ldps", session.added_ldps},
                  {"untagged", session.untagged()}};
  if (submitted && session.result) {
    payload["result"] = submit_payload(session, *session.result).at("result");
  }
  return payload;
}

json AnnotationService::submit_payload(const AnnotationSession& session,
                                       const SubmitResult& result) {
  return {{"session_id", session.session_id},
          {"version", session.version},
          {"result", {{"review", result.review},
                      {"scores", result.scores},
                      {"alignment", to_json_value(result.alignment)}}}};
}

}  // namespace ldpjudge
