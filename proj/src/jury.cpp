#include "ldpjudge/jury.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ldpjudge/error.hpp"

namespace ldpjudge {

namespace {

constexpr std::array<std::string_view, 4> kColorNames = {"red", "grey", "orange", "green"};

void check_ballot(const JuryBallot& ballot) {
  if (ballot.votes.empty()) throw Error(ErrorCode::kInvalidArgument, "ballot has no votes");
  if (!ballot.judge_ids.empty() && ballot.judge_ids.size() != ballot.votes.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ballot votes and judge_ids differ in length");
  }
}

Tag highest_priority(std::span<const Tag> tags, const ColorMap& colors) {
  return *std::min_element(tags.begin(), tags.end(), [&](Tag a, Tag b) {
    return colors.priority(a) < colors.priority(b);
  });
}

}  // namespace

std::string_view to_string(Color color) { return kColorNames[static_cast<std::size_t>(color)]; }

std::optional<Color> parse_color(std::string_view name) {
  const std::string lowered = to_lower_ascii(trim(name));
  for (std::size_t i = 0; i < kColorNames.size(); ++i) {
    if (lowered == kColorNames[i]) return static_cast<Color>(i);
  }
  if (lowered == "gray") return Color::kGrey;
  return std::nullopt;
}

ColorMap::ColorMap() : tags_{Tag::kIncorrect, Tag::kMissing, Tag::kIrrelevant, Tag::kCorrect} {}

ColorMap::ColorMap(const std::array<Tag, 4>& tags) : tags_(tags) {
  for (Tag tag : kAllTags) {
    if (std::count(tags_.begin(), tags_.end(), tag) != 1) {
      throw Error(ErrorCode::kInvalidArgument, "color map must assign each tag exactly one color",
                  {{"tag", to_string(tag)}});
    }
  }
}

Color ColorMap::color_of(Tag tag) const {
  const auto it = std::find(tags_.begin(), tags_.end(), tag);
  return static_cast<Color>(it - tags_.begin());
}

std::string_view to_string(JuryStrategy strategy) {
  switch (strategy) {
    case JuryStrategy::kRuleBased: return "rule_based";
    case JuryStrategy::kMajority: return "majority";
    case JuryStrategy::kHybrid: return "hybrid";
  }
  return "unknown";
}

std::optional<JuryStrategy> parse_jury_strategy(std::string_view name) {
  std::string lowered = to_lower_ascii(trim(name));
  std::replace(lowered.begin(), lowered.end(), '-', '_');
  if (lowered == "rule_based") return JuryStrategy::kRuleBased;
  if (lowered == "majority") return JuryStrategy::kMajority;
  if (lowered == "hybrid") return JuryStrategy::kHybrid;
  return std::nullopt;
}

std::vector<JuryBallot> build_ballots(std::span<const Evaluation> evaluations, Embedder& embedder,
                                      const AlignConfig& config) {
  if (evaluations.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a jury needs at least 2 evaluations",
                {{"evaluations", evaluations.size()}});
  }
  const std::string& qa_id = evaluations.front().qa_id;
  for (std::size_t k = 1; k < evaluations.size(); ++k) {
    if (evaluations[k].qa_id != qa_id) {
      throw Error(ErrorCode::kInvalidArgument, "jury evaluations refer to different qa_ids",
                  {{"expected", qa_id}, {"found", evaluations[k].qa_id}, {"index", k}});
    }
  }

  std::vector<JuryBallot> ballots;
  Evaluation anchors;  // one representative LDP per ballot
  anchors.qa_id = qa_id;
  const auto& first = evaluations.front();
  for (const auto& ldp : first.ldps) {
    ballots.push_back({ldp.text, {ldp.tag}, {first.evaluator_id}, ldp.citation});
    anchors.ldps.push_back(ldp);
  }

  for (std::size_t judge = 1; judge < evaluations.size(); ++judge) {
    const auto& current = evaluations[judge];
    const AlignmentReport matched = match_ldps(anchors, current, embedder, config);
    std::vector<std::optional<Tag>> votes(ballots.size());
    std::vector<bool> used(current.ldps.size(), false);
    for (const auto& pair : matched.pairs) {
      votes[pair.machine_index] = pair.human.tag;
      used[pair.human_index] = true;
    }
    for (std::size_t b = 0; b < ballots.size(); ++b) {
      ballots[b].votes.push_back(votes[b].value_or(Tag::kMissing));
      ballots[b].judge_ids.push_back(current.evaluator_id);
    }
    for (std::size_t i = 0; i < current.ldps.size(); ++i) {
      if (used[i]) continue;
      const auto& ldp = current.ldps[i];
      JuryBallot ballot{ldp.text, {}, {}, ldp.citation};
      for (std::size_t earlier = 0; earlier < judge; ++earlier) {
        ballot.votes.push_back(Tag::kMissing);
        ballot.judge_ids.push_back(evaluations[earlier].evaluator_id);
      }
      ballot.votes.push_back(ldp.tag);
      ballot.judge_ids.push_back(current.evaluator_id);
      ballots.push_back(std::move(ballot));
      anchors.ldps.push_back(ldp);
    }
  }
  return ballots;
}

Tag rule_based(const JuryBallot& ballot, const ColorMap& colors) {
  check_ballot(ballot);
  return highest_priority(ballot.votes, colors);
}

Tag majority(const JuryBallot& ballot, const ColorMap& colors) {
  check_ballot(ballot);
  TagCounts counts;
  for (Tag vote : ballot.votes) ++counts[vote];
  std::int64_t best = 0;
  for (Tag tag : kAllTags) best = std::max(best, counts[tag]);
  std::vector<Tag> tied;
  for (Tag tag : kAllTags) {
    if (counts[tag] == best) tied.push_back(tag);
  }
  return highest_priority(tied, colors);
}

Tag hybrid(const JuryBallot& ballot, const ColorMap& colors) {
  check_ballot(ballot);
  if (std::find(ballot.votes.begin(), ballot.votes.end(), Tag::kIncorrect) != ballot.votes.end()) {
    return Tag::kIncorrect;
  }
  return majority(ballot, colors);
}

Tag decide(JuryStrategy strategy, const JuryBallot& ballot, const ColorMap& colors) {
  switch (strategy) {
    case JuryStrategy::kRuleBased: return rule_based(ballot, colors);
    case JuryStrategy::kMajority: return majority(ballot, colors);
    case JuryStrategy::kHybrid: return hybrid(ballot, colors);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown jury strategy");
}

Evaluation aggregate(std::span<const Evaluation> evaluations, JuryStrategy strategy,
                     Embedder& embedder, const AlignConfig& config, const ColorMap& colors) {
  const auto ballots = build_ballots(evaluations, embedder, config);
  Evaluation out;
  out.qa_id = evaluations.front().qa_id;
  out.evaluator_id = fmt::format("jury:{}", to_string(strategy));
  out.evaluator_kind = Actor::kMachine;
  out.created_at = evaluations.front().created_at;
  for (const auto& ballot : ballots) {
    out.ldps.push_back({ballot.ldp_text, decide(strategy, ballot, colors), Actor::kMachine,
                        ballot.citation});
  }
  return out;
}

}  // namespace ldpjudge
