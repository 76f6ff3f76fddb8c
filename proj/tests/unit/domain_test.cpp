#include <gtest/gtest.h>

#include "ldpjudge/domain.hpp"
#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"
#include "test_support.hpp"

namespace ldpjudge {
namespace {

using testing::make_evaluation;
using testing::TempDir;

TEST(Tag, ParsesCaseInsensitively) {
  EXPECT_EQ(parse_tag(" Correct "), Tag::kCorrect);
  EXPECT_EQ(parse_tag("MISSING"), Tag::kMissing);
  EXPECT_EQ(parse_tag("irrelevant"), Tag::kIrrelevant);
  EXPECT_FALSE(parse_tag("purple"));
  for (auto tag : kAllTags) EXPECT_EQ(parse_tag(to_string(tag)), tag);
}

TEST(Timestamp, AcceptsOnlyUtcSecondsForm) {
  EXPECT_TRUE(is_iso8601_utc("2025-01-31T12:00:00Z"));
  EXPECT_FALSE(is_iso8601_utc("2025-01-31 12:00:00"));
  EXPECT_FALSE(is_iso8601_utc("2025-13-31T12:00:00Z"));
  EXPECT_FALSE(is_iso8601_utc("2025-01-31T12:00:00+01:00"));
  EXPECT_FALSE(is_iso8601_utc(""));
}

TEST(TagCounts, CountsEveryTag) {
  const auto e = make_evaluation("q", Actor::kMachine,
                                 {{"a", Tag::kCorrect}, {"b", Tag::kCorrect}, {"c", Tag::kIrrelevant},
                                  {"d", Tag::kMissing}, {"e", Tag::kIncorrect}});
  const TagCounts counts = tag_counts(e);
  EXPECT_EQ(counts, (TagCounts{2, 1, 1, 1}));
  EXPECT_EQ(counts.total(), 5);
  EXPECT_EQ(counts[Tag::kIrrelevant], 1);
}

TEST(Validate, EvaluationNeedsLdpsAndTimestamp) {
  Evaluation e = make_evaluation("q", Actor::kMachine, {{"a", Tag::kCorrect}});
  EXPECT_TRUE(validate(e).empty());
  e.created_at = "yesterday";
  EXPECT_FALSE(validate(e).empty());
  e = make_evaluation("q", Actor::kMachine, {});
  EXPECT_FALSE(validate(e).empty());
}

TEST(Validate, NonMissingLdpSourceMatchesEvaluator) {
  Evaluation e = make_evaluation("q", Actor::kHuman, {{"a", Tag::kCorrect}});
  e.ldps[0].source = Actor::kMachine;
  const auto v = validate(e);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "ldps[0].source");
  e.ldps[0].tag = Tag::kMissing;
  EXPECT_TRUE(validate(e).empty());
}

TEST(Validate, MissingLdpMayNotQuoteTheAnswer) {
  QAPair qa{"q", "c", "What is the term?", "The term is two years.", std::nullopt};
  auto e = make_evaluation("q", Actor::kHuman,
                           {{"The term is two years.", Tag::kCorrect},
                            {"Renewal needs ninety days notice.", Tag::kMissing}});
  EXPECT_TRUE(validate(e, qa).empty());
  e.ldps[1].text = "The term is two years.";
  EXPECT_FALSE(validate(e, qa).empty());
}

TEST(Validate, NonMissingLdpsFollowAnswerOrder) {
  QAPair qa{"q", "c", "Q?", "First point. Second point.", std::nullopt};
  const auto ordered = make_evaluation("q", Actor::kMachine,
                                       {{"First point.", Tag::kCorrect}, {"Second point.", Tag::kCorrect}});
  EXPECT_TRUE(validate(ordered, qa).empty());
  const auto swapped = make_evaluation("q", Actor::kMachine,
                                       {{"Second point.", Tag::kCorrect}, {"First point.", Tag::kCorrect}});
  EXPECT_FALSE(validate(swapped, qa).empty());
}

TEST(Validate, ReviewModesCarryTheRightFields) {
  HumanReview manual{"q", "r", ReviewMode::kManual, 3, 4, std::nullopt};
  EXPECT_TRUE(validate(manual).empty());
  manual.correctness_grade = 6;
  EXPECT_FALSE(validate(manual).empty());
  HumanReview guided{"q", "r", ReviewMode::kLdpGuided, std::nullopt, std::nullopt, std::nullopt};
  EXPECT_FALSE(validate(guided).empty());
  guided.evaluation = make_evaluation("q", Actor::kHuman, {{"a", Tag::kCorrect}});
  EXPECT_TRUE(validate(guided).empty());
  guided.evaluation->qa_id = "other";
  EXPECT_FALSE(validate(guided).empty());
}

TEST(Json, EvaluationRoundTrips) {
  auto e = make_evaluation("q", Actor::kMachine, {{"a [par_3]", Tag::kCorrect}, {"b", Tag::kMissing}});
  e.ldps[0].citation = "[par_3]";
  const nlohmann::json j = e;
  EXPECT_EQ(j.at("ldps").at(0).at("citation"), "[par_3]");
  EXPECT_FALSE(j.at("ldps").at(1).contains("citation"));
  EXPECT_EQ(j.get<Evaluation>(), e);
}

TEST(Json, StrictDecodingNamesTheField) {
  nlohmann::json j = {{"qa_id", "q"}, {"evaluator_id", "x"}, {"evaluator_kind", "robot"},
                      {"ldps", nlohmann::json::array()}, {"created_at", testing::kStamp}};
  try {
    (void)j.get<Evaluation>();
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_EQ(e.details().at("field"), "evaluator_kind");
  }
}

TEST(Jsonl, ReportsTheFailingLine) {
  TempDir dir;
  write_file(dir / "x.jsonl", "{\"a\":1}\n\n{broken\n");
  try {
    (void)read_jsonl(dir / "x.jsonl");
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_EQ(e.details().at("line"), 3);
  }
}

TEST(Jsonl, MissingFileIsAnIoError) {
  try {
    (void)read_jsonl("/nonexistent/ldpjudge.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Jsonl, WriteThenLoad) {
  TempDir dir;
  const std::vector<Evaluation> records = {
      make_evaluation("q1", Actor::kMachine, {{"a", Tag::kCorrect}}),
      make_evaluation("q2", Actor::kHuman, {{"b", Tag::kIncorrect}})};
  write_file(dir / "e.jsonl", to_jsonl(records));
  EXPECT_EQ(load_jsonl<Evaluation>(dir / "e.jsonl"), records);
}

TEST(ErrorCodes, HaveSnakeCaseNames) {
  EXPECT_EQ(to_string(ErrorCode::kNotFound), "not_found");
  EXPECT_EQ(to_string(ErrorCode::kDigestMismatch), "digest_mismatch");
}

}  // namespace
}  // namespace ldpjudge
