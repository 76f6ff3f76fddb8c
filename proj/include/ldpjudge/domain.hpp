#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ldpjudge {

// Four-way tag attached to every Legal Data Point (LDP).
enum class Tag : std::uint8_t { kCorrect, kIncorrect, kIrrelevant, kMissing };

inline constexpr Tag kAllTags[] = {Tag::kCorrect, Tag::kIncorrect, Tag::kIrrelevant,
                                   Tag::kMissing};

/// Canonical lowercase name ("correct", "incorrect", ...).
std::string_view to_string(Tag tag);
/// Case-insensitive; surrounding whitespace is ignored.
std::optional<Tag> parse_tag(std::string_view name);

// Who produced an LDP or an evaluation.
enum class Actor : std::uint8_t { kMachine, kHuman };

std::string_view to_string(Actor actor);
std::optional<Actor> parse_actor(std::string_view name);

struct LegalDataPoint {
  std::string text;
  Tag tag = Tag::kCorrect;
  Actor source = Actor::kMachine;
  std::optional<std::string> citation;

  friend bool operator==(const LegalDataPoint&, const LegalDataPoint&) = default;
};

struct ContractDoc {
  std::string id;
  std::string contract_type;
  std::string text;

  friend bool operator==(const ContractDoc&, const ContractDoc&) = default;
};

struct QAPair {
  std::string id;
  std::string contract_id;
  std::string question;
  std::string answer;
  std::optional<std::string> ground_truth;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

/// Tagged decomposition of one answer by one evaluator. Missing LDPs live in
/// the same list as the answer's own LDPs. `created_at` is an ISO-8601 UTC
/// timestamp ("2025-01-31T12:00:00Z").
struct Evaluation {
  std::string qa_id;
  std::string evaluator_id;
  Actor evaluator_kind = Actor::kMachine;
  std::vector<LegalDataPoint> ldps;
  std::string created_at;

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

struct TagCounts {
  std::int64_t n_correct = 0;
  std::int64_t n_incorrect = 0;
  std::int64_t n_irrelevant = 0;
  std::int64_t n_missing = 0;

  std::int64_t total() const { return n_correct + n_incorrect + n_irrelevant + n_missing; }
  std::int64_t& operator[](Tag tag);
  std::int64_t operator[](Tag tag) const;

  friend bool operator==(const TagCounts&, const TagCounts&) = default;
};

/// Scores derived from TagCounts; an absent value means its denominator was zero.
struct ScoreSet {
  std::optional<double> correctness;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;

  friend bool operator==(const ScoreSet&, const ScoreSet&) = default;
};

enum class ReviewMode : std::uint8_t { kManual, kLdpGuided };

std::string_view to_string(ReviewMode mode);
std::optional<ReviewMode> parse_review_mode(std::string_view name);

struct HumanReview {
  std::string qa_id;
  std::string reviewer_id;
  ReviewMode mode = ReviewMode::kManual;
  std::optional<int> correctness_grade;
  std::optional<int> relevance_grade;
  std::optional<Evaluation> evaluation;

  friend bool operator==(const HumanReview&, const HumanReview&) = default;
};

TagCounts tag_counts(const Evaluation& evaluation);
TagCounts tag_counts(const std::vector<LegalDataPoint>& ldps);

// -- validation ---------------------------------------------------------------

struct Violation {
  std::string path;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using Violations = std::vector<Violation>;

Violations validate(const LegalDataPoint& ldp, std::string_view path = "");
Violations validate(const ContractDoc& doc);
Violations validate(const QAPair& qa);
Violations validate(const Evaluation& evaluation);
Violations validate(const TagCounts& counts);
Violations validate(const ScoreSet& scores);
Violations validate(const HumanReview& review);

/// Evaluation checks that need the answer text: Missing LDPs must not quote
/// the answer verbatim and the evaluation must refer to this QA pair.
Violations validate(const Evaluation& evaluation, const QAPair& qa);

/// True for strings shaped like "YYYY-MM-DDTHH:MM:SSZ".
bool is_iso8601_utc(std::string_view text);

std::string trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);

}  // namespace ldpjudge
