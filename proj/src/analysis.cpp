#include "ldpjudge/analysis.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ldpjudge/csv.hpp"
#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"

namespace ldpjudge {

namespace {

constexpr const char* kTotalRow = "Total";

bool reaches(const std::optional<double>& value, double threshold) {
  return value && round_decimal(*value, 10) >= round_decimal(threshold, 10);
}

std::string fixed(double value, int places) { return fmt::format("{:.{}f}", value, places); }

std::string optional_fixed(const std::optional<double>& value, int places) {
  return value ? fixed(*value, places) : std::string();
}

std::map<std::string, const HumanReview*> index_reviews(std::span<const HumanReview> reviews,
                                                        const char* side) {
  std::map<std::string, const HumanReview*> out;
  for (const auto& review : reviews) {
    if (auto violations = validate(review); !violations.empty()) {
      throw Error(ErrorCode::kValidation,
                  fmt::format("review of {} is invalid: {}", review.qa_id,
                              violations.front().message),
                  {{"qa_id", review.qa_id}, {"path", violations.front().path}});
    }
    if (!out.emplace(review.qa_id, &review).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("reviewer {} has two reviews of {}", side, review.qa_id),
                  {{"qa_id", review.qa_id}, {"side", side}});
    }
  }
  return out;
}

void finish(IAACell& cell) {
  if (cell.n_pairs == 0) return;
  const double n = static_cast<double>(cell.n_pairs);
  cell.correctness_agreement = static_cast<double>(cell.correctness_matches) / n;
  cell.relevance_agreement = static_cast<double>(cell.relevance_matches) / n;
}

}  // namespace

Violations validate(const TriageConfig& config) {
  Violations out;
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(config.correctness_threshold)) {
    out.push_back({"correctness_threshold", "correctness_threshold in [0,1]"});
  }
  if (!unit(config.relevance_threshold)) {
    out.push_back({"relevance_threshold", "relevance_threshold in [0,1]"});
  }
  return out;
}

std::map<std::string, ScoreSet> score_map(std::span<const Evaluation> evaluations) {
  std::map<std::string, ScoreSet> out;
  for (const auto& evaluation : evaluations) {
    if (!out.emplace(evaluation.qa_id, compute_scores(tag_counts(evaluation))).second) {
      throw Error(ErrorCode::kInvalidArgument, "two evaluations for one qa_id",
                  {{"qa_id", evaluation.qa_id}});
    }
  }
  return out;
}

TriageReport triage(const std::map<std::string, ScoreSet>& scores, const TriageConfig& config) {
  if (auto violations = validate(config); !violations.empty()) {
    throw Error(ErrorCode::kInvalidArgument, violations.front().message,
                {{"path", violations.front().path}});
  }
  TriageReport report;
  report.total = scores.size();
  report.correctness_threshold = config.correctness_threshold;
  report.relevance_threshold = config.relevance_threshold;
  for (const auto& [qa_id, s] : scores) {
    const bool clear =
        reaches(s.correctness, config.correctness_threshold) && reaches(s.f1, config.relevance_threshold);
    (clear ? report.cleared : report.flagged).push_back(qa_id);
  }
  return report;
}

TriageReport time_savings(TriageReport report, double baseline_hours) {
  if (!(baseline_hours > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "baseline_hours must be positive",
                {{"baseline_hours", baseline_hours}});
  }
  if (report.total == 0) throw Error(ErrorCode::kInsufficientData, "triage report is empty");
  report.baseline_hours = baseline_hours;
  report.estimated_hours = round_decimal(
      baseline_hours * static_cast<double>(report.flagged.size()) / static_cast<double>(report.total),
      2);
  return report;
}

nlohmann::json to_json_value(const TriageReport& report) {
  nlohmann::json j = {{"total", report.total},
                      {"cleared_count", report.cleared.size()},
                      {"flagged_count", report.flagged.size()},
                      {"correctness_threshold", report.correctness_threshold},
                      {"relevance_threshold", report.relevance_threshold},
                      {"cleared", report.cleared},
                      {"flagged", report.flagged},
                      {"baseline_hours", nullptr},
                      {"estimated_hours", nullptr}};
  if (report.baseline_hours) j["baseline_hours"] = *report.baseline_hours;
  if (report.estimated_hours) j["estimated_hours"] = *report.estimated_hours;
  return j;
}

std::string triage_csv(const TriageReport& report) {
  std::string out = csv_row({"relevance_threshold", "total", "cleared", "flagged",
                             "proportion_to_review", "baseline_hours", "estimated_hours"});
  const double proportion =
      report.total == 0 ? 0.0
                        : static_cast<double>(report.flagged.size()) / static_cast<double>(report.total);
  out += csv_row({fixed(report.relevance_threshold, 2), std::to_string(report.total),
                  std::to_string(report.cleared.size()), std::to_string(report.flagged.size()),
                  fixed(proportion, 3), optional_fixed(report.baseline_hours, 2),
                  optional_fixed(report.estimated_hours, 2)});
  return out;
}

std::string time_savings_csv(const std::vector<std::pair<std::string, TriageReport>>& rows) {
  std::string out =
      csv_row({"reviewer", "qa_pairs", "qa_pairs_to_review", "baseline_hours", "estimated_hours"});
  for (const auto& [reviewer, report] : rows) {
    out += csv_row({reviewer, std::to_string(report.total), std::to_string(report.flagged.size()),
                    optional_fixed(report.baseline_hours, 2),
                    optional_fixed(report.estimated_hours, 2)});
  }
  return out;
}

ReviewQuarters review_quarters(const HumanReview& review) {
  ReviewQuarters q;
  if (review.mode == ReviewMode::kManual) {
    if (review.correctness_grade) q.correctness = convert_grade(*review.correctness_grade);
    if (review.relevance_grade) q.relevance = convert_grade(*review.relevance_grade);
    return q;
  }
  if (!review.evaluation) return q;
  const ScoreSet scores = compute_scores(tag_counts(*review.evaluation));
  if (scores.correctness) q.correctness = bucket(*scores.correctness);
  if (scores.f1) q.relevance = bucket(*scores.f1);
  return q;
}

std::vector<IAACell> iaa(std::span<const HumanReview> reviews_a,
                         std::span<const HumanReview> reviews_b, const IAAOptions& options) {
  const auto a = index_reviews(reviews_a, "a");
  const auto b = index_reviews(reviews_b, "b");
  std::vector<std::string> only_a, only_b;
  for (const auto& [qa_id, _] : a) {
    if (!b.count(qa_id)) only_a.push_back(qa_id);
  }
  for (const auto& [qa_id, _] : b) {
    if (!a.count(qa_id)) only_b.push_back(qa_id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "the two reviewers covered different QA pairs",
                {{"only_a", only_a}, {"only_b", only_b}});
  }
  if (a.empty()) throw Error(ErrorCode::kInsufficientData, "no reviews to compare");

  std::map<std::string, IAACell> groups;
  IAACell total;
  total.contract_type = kTotalRow;
  for (const auto& [qa_id, review_a] : a) {
    const auto qa = review_quarters(*review_a);
    const auto qb = review_quarters(*b.at(qa_id));
    const bool correctness_match = qa.correctness == qb.correctness;
    const bool relevance_match = qa.relevance == qb.relevance;
    auto tally = [&](IAACell& cell) {
      ++cell.n_pairs;
      cell.correctness_matches += correctness_match ? 1 : 0;
      cell.relevance_matches += relevance_match ? 1 : 0;
    };
    tally(total);
    if (options.group_by_contract_type) {
      auto it = options.contract_type_by_qa.find(qa_id);
      if (it == options.contract_type_by_qa.end()) {
        throw Error(ErrorCode::kNotFound, "no contract type for " + qa_id, {{"qa_id", qa_id}});
      }
      auto& cell = groups[it->second];
      cell.contract_type = it->second;
      tally(cell);
    }
  }
  std::vector<IAACell> out;
  for (auto& [_, cell] : groups) {
    finish(cell);
    out.push_back(cell);
  }
  finish(total);
  out.push_back(total);
  return out;
}

nlohmann::json to_json_value(const std::vector<IAACell>& cells) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cells) {
    out.push_back({{"contract_type", c.contract_type},
                   {"n_pairs", c.n_pairs},
                   {"correctness_matches", c.correctness_matches},
                   {"relevance_matches", c.relevance_matches},
                   {"correctness_agreement", c.correctness_agreement},
                   {"relevance_agreement", c.relevance_agreement}});
  }
  return out;
}

std::string iaa_csv(const std::vector<IAACell>& cells) {
  std::string out = csv_row({"contract_type", "n_pairs", "correctness_iaa", "relevance_iaa"});
  for (const auto& c : cells) {
    out += csv_row({c.contract_type, std::to_string(c.n_pairs), fixed(c.correctness_agreement, 3),
                    fixed(c.relevance_agreement, 3)});
  }
  return out;
}

std::vector<CorrelationRow> correlation_report(
    const std::vector<std::pair<std::string, std::vector<double>>>& method_scores,
    std::span<const QuarterScore> human) {
  std::vector<double> human_values;
  human_values.reserve(human.size());
  for (auto q : human) human_values.push_back(q.value());
  std::vector<CorrelationRow> rows;
  for (const auto& [method, scores] : method_scores) {
    CorrelationRow row;
    row.method = method;
    row.correlation = pearson(scores, human_values);
    row.bucketed_accuracy = bucketed_accuracy(scores, human);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json_value(const std::vector<CorrelationRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    out.push_back({{"method", row.method},
                   {"pearson_r", row.correlation.r},
                   {"p_value", row.correlation.p_value},
                   {"n", row.correlation.n},
                   {"bucketed_accuracy", row.bucketed_accuracy}});
  }
  return out;
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::string out = csv_row({"method", "pearson_r", "p_value", "bucketed_accuracy", "n"});
  for (const auto& row : rows) {
    out += csv_row({row.method, fixed(row.correlation.r, 3), fixed(row.correlation.p_value, 4),
                    fixed(row.bucketed_accuracy, 3), std::to_string(row.correlation.n)});
  }
  return out;
}

}  // namespace ldpjudge
