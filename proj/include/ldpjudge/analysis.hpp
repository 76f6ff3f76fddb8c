#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpjudge/domain.hpp"
#include "ldpjudge/metrics.hpp"

namespace ldpjudge {

// -- triage ------------------------------------------------------------------

struct TriageConfig {
  double correctness_threshold = 1.0;
  double relevance_threshold = 0.85;  // compared against f1
};

Violations validate(const TriageConfig& config);

struct TriageReport {
  std::size_t total = 0;
  std::vector<std::string> cleared;  // sorted by qa_id
  std::vector<std::string> flagged;  // sorted by qa_id
  double correctness_threshold = 1.0;
  double relevance_threshold = 0.0;
  std::optional<double> baseline_hours;
  std::optional<double> estimated_hours;
};

/// ScoreSet per qa_id. Throws Error(kInvalidArgument) on duplicate qa_ids.
std::map<std::string, ScoreSet> score_map(std::span<const Evaluation> evaluations);

/// Clears a QA pair when correctness and f1 are both present and reach their
/// thresholds (compared after rounding to 10 decimals); everything else is flagged.
TriageReport triage(const std::map<std::string, ScoreSet>& scores, const TriageConfig& config);

/// estimated_hours = baseline_hours * |flagged| / total, rounded to 2 decimals.
TriageReport time_savings(TriageReport report, double baseline_hours);

nlohmann::json to_json_value(const TriageReport& report);
/// relevance_threshold,total,cleared,flagged,proportion_to_review,baseline_hours,estimated_hours
std::string triage_csv(const TriageReport& report);
/// reviewer,qa_pairs,qa_pairs_to_review,baseline_hours,estimated_hours
std::string time_savings_csv(const std::vector<std::pair<std::string, TriageReport>>& rows);

// -- inter-annotator agreement -------------------------------------------------

struct IAACell {
  std::string contract_type;  // "Total" for the all-pairs row
  std::size_t n_pairs = 0;
  std::size_t correctness_matches = 0;
  std::size_t relevance_matches = 0;
  double correctness_agreement = 0.0;
  double relevance_agreement = 0.0;
};

struct IAAOptions {
  bool group_by_contract_type = false;
  std::map<std::string, std::string> contract_type_by_qa;
};

/// Quarter scores a review assigns: converted grades for manual reviews,
/// bucketed correctness and f1 for ldp_guided ones. Absent when the score is.
struct ReviewQuarters {
  std::optional<QuarterScore> correctness;
  std::optional<QuarterScore> relevance;
};
ReviewQuarters review_quarters(const HumanReview& review);

/// Exact-match agreement on quarter scores between two reviewers. One cell per
/// contract type (sorted) when grouping, always followed by a "Total" cell.
/// Throws Error(kInvalidArgument) when the qa_id sets differ or a reviewer
/// has two reviews of one QA pair.
std::vector<IAACell> iaa(std::span<const HumanReview> reviews_a,
                         std::span<const HumanReview> reviews_b, const IAAOptions& options = {});

nlohmann::json to_json_value(const std::vector<IAACell>& cells);
/// contract_type,n_pairs,correctness_iaa,relevance_iaa (3 decimals).
std::string iaa_csv(const std::vector<IAACell>& cells);

// -- correlation ---------------------------------------------------------------

struct CorrelationRow {
  std::string method;
  CorrelationResult correlation;
  double bucketed_accuracy = 0.0;
};

/// One row per method, in input order.
std::vector<CorrelationRow> correlation_report(
    const std::vector<std::pair<std::string, std::vector<double>>>& method_scores,
    std::span<const QuarterScore> human);

nlohmann::json to_json_value(const std::vector<CorrelationRow>& rows);
/// method,pearson_r,p_value,bucketed_accuracy,n
std::string correlation_csv(const std::vector<CorrelationRow>& rows);

}  // namespace ldpjudge
