#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldpjudge/alignment.hpp"
#include "ldpjudge/domain.hpp"

namespace ldpjudge {

enum class Color : std::uint8_t { kRed, kGrey, kOrange, kGreen };

std::string_view to_string(Color color);
std::optional<Color> parse_color(std::string_view name);

/// Tag <-> color bijection. Colors rank red > grey > orange > green, so the
/// map also fixes the priority used by the rule-based strategy.
class ColorMap {
 public:
  /// red=Incorrect, grey=Missing, orange=Irrelevant, green=Correct.
  ColorMap();
  /// `tags[c]` is the tag shown in color c. Throws unless it is a bijection.
  explicit ColorMap(const std::array<Tag, 4>& tags);

  Color color_of(Tag tag) const;
  Tag tag_of(Color color) const { return tags_[static_cast<std::size_t>(color)]; }
  /// 0 is the highest priority.
  int priority(Tag tag) const { return static_cast<int>(color_of(tag)); }

 private:
  std::array<Tag, 4> tags_;
};

struct JuryBallot {
  std::string ldp_text;
  std::vector<Tag> votes;  // one per judge, in evaluation order
  std::vector<std::string> judge_ids;
  std::optional<std::string> citation;

  friend bool operator==(const JuryBallot&, const JuryBallot&) = default;
};

enum class JuryStrategy : std::uint8_t { kRuleBased, kMajority, kHybrid };

std::string_view to_string(JuryStrategy strategy);
std::optional<JuryStrategy> parse_jury_strategy(std::string_view name);

/// Anchors ballots on the first evaluation. Each later judge is matched, with
/// the alignment matcher, against every ballot formed so far; its unmatched
/// LDPs open new ballots. Judges without an LDP on a ballot vote Missing.
/// Throws Error(kInvalidArgument) for fewer than 2 evaluations or mixed qa_ids.
std::vector<JuryBallot> build_ballots(std::span<const Evaluation> evaluations, Embedder& embedder,
                                      const AlignConfig& config);

Tag rule_based(const JuryBallot& ballot, const ColorMap& colors = ColorMap());
/// Most frequent tag; ties go to the higher-priority tag.
Tag majority(const JuryBallot& ballot, const ColorMap& colors = ColorMap());
/// Incorrect when any judge says so, otherwise majority.
Tag hybrid(const JuryBallot& ballot, const ColorMap& colors = ColorMap());

Tag decide(JuryStrategy strategy, const JuryBallot& ballot, const ColorMap& colors = ColorMap());

/// Evaluation with evaluator_id "jury:<strategy>"; created_at comes from the
/// first evaluation.
Evaluation aggregate(std::span<const Evaluation> evaluations, JuryStrategy strategy,
                     Embedder& embedder, const AlignConfig& config,
                     const ColorMap& colors = ColorMap());

}  // namespace ldpjudge
