#include <gtest/gtest.h>

#include "ldpjudge/analysis.hpp"
#include "ldpjudge/error.hpp"
#include "test_support.hpp"

namespace ldpjudge {
namespace {

using testing::counted_evaluation;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

HumanReview manual(const std::string& qa, const std::string& reviewer, int c, int r) {
  return {qa, reviewer, ReviewMode::kManual, c, r, std::nullopt};
}

HumanReview guided(const std::string& qa, const std::string& reviewer, int c, int i, int ir, int m) {
  HumanReview review{qa, reviewer, ReviewMode::kLdpGuided, std::nullopt, std::nullopt, std::nullopt};
  review.evaluation = counted_evaluation(qa, c, i, ir, m, Actor::kHuman);
  return review;
}

TEST(Triage, ThresholdsAreInclusive) {
  const std::vector<Evaluation> evaluations = {
      counted_evaluation("a", 17, 0, 3, 3),  // f1 exactly 0.85
      counted_evaluation("b", 8, 0, 2, 1),   // f1 just under
      counted_evaluation("c", 4, 1, 0, 0),   // an incorrect point
      counted_evaluation("d", 0, 0, 0, 2),   // no scores at all
      counted_evaluation("e", 3, 0, 0, 0)};
  const auto report = triage(score_map(evaluations), {});
  EXPECT_EQ(report.total, 5u);
  EXPECT_EQ(report.cleared, (std::vector<std::string>{"a", "e"}));
  EXPECT_EQ(report.flagged, (std::vector<std::string>{"b", "c", "d"}));
}

TEST(Triage, LooserCorrectnessThreshold) {
  const std::vector<Evaluation> evaluations = {counted_evaluation("c", 4, 1, 0, 0)};
  EXPECT_EQ(triage(score_map(evaluations), {0.8, 0.85}).cleared.size(), 1u);
  EXPECT_EQ(code_of([&] { (void)triage(score_map(evaluations), {1.5, 0.85}); }),
            ErrorCode::kInvalidArgument);
}

TEST(Triage, DuplicateQaIdsAreRejected) {
  const std::vector<Evaluation> evaluations = {counted_evaluation("a", 1, 0, 0, 0),
                                               counted_evaluation("a", 2, 0, 0, 0)};
  EXPECT_EQ(code_of([&] { (void)score_map(evaluations); }), ErrorCode::kInvalidArgument);
}

TEST(TimeSavings, ScalesByShareToReview) {
  TriageReport report;
  report.total = 150;
  report.flagged.assign(99, "x");
  report.cleared.assign(51, "y");
  EXPECT_EQ(*time_savings(report, 8.25).estimated_hours, 5.45);
  EXPECT_EQ(*time_savings(report, 7.55).estimated_hours, 4.98);
  EXPECT_EQ(code_of([&] { (void)time_savings(report, 0.0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { (void)time_savings(TriageReport{}, 1.0); }), ErrorCode::kInsufficientData);
}

TEST(TimeSavings, CsvAndJson) {
  TriageReport report;
  report.total = 2;
  report.cleared = {"a"};
  report.flagged = {"b"};
  report.relevance_threshold = 0.85;
  const auto timed = time_savings(report, 3.0);
  EXPECT_EQ(time_savings_csv({{"Reviewer 1", timed}}),
            "reviewer,qa_pairs,qa_pairs_to_review,baseline_hours,estimated_hours\n"
            "Reviewer 1,2,1,3.00,1.50\n");
  const auto j = to_json_value(timed);
  EXPECT_EQ(j.at("cleared_count"), 1);
  EXPECT_EQ(j.at("estimated_hours"), 1.5);
  EXPECT_TRUE(to_json_value(report).at("estimated_hours").is_null());
  EXPECT_NE(triage_csv(report).find("0.85,2,1,1,0.500,,"), std::string::npos);
}

TEST(ReviewQuarters, ManualGradesAndGuidedBuckets) {
  const auto m = review_quarters(manual("q", "r", 5, 2));
  EXPECT_EQ(m.correctness->value(), 1.0);
  EXPECT_EQ(m.relevance->value(), 0.25);
  const auto g = review_quarters(guided("q", "r", 2, 1, 1, 0));
  EXPECT_EQ(g.correctness->value(), 0.5);   // 2/3
  EXPECT_EQ(g.relevance->value(), 0.75);    // f1 0.8
  const auto absent = review_quarters(guided("q", "r", 0, 0, 0, 2));
  EXPECT_FALSE(absent.correctness);
  EXPECT_FALSE(absent.relevance);
}

TEST(Iaa, ManualGroupedWithTotal) {
  const std::vector<HumanReview> a = {manual("q1", "a", 5, 5), manual("q2", "a", 3, 4), manual("q3", "a", 1, 1)};
  const std::vector<HumanReview> b = {manual("q1", "b", 5, 4), manual("q2", "b", 3, 4), manual("q3", "b", 2, 1)};
  IAAOptions options;
  options.group_by_contract_type = true;
  options.contract_type_by_qa = {{"q1", "Consulting"}, {"q2", "Consulting"}, {"q3", "Cooperation"}};
  const auto cells = iaa(a, b, options);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].contract_type, "Consulting");
  EXPECT_EQ(cells[0].correctness_matches, 2u);
  EXPECT_EQ(cells[0].relevance_matches, 1u);
  EXPECT_EQ(cells[1].contract_type, "Cooperation");
  EXPECT_DOUBLE_EQ(cells[1].correctness_agreement, 0.0);
  EXPECT_EQ(cells[2].contract_type, "Total");
  EXPECT_EQ(cells[2].n_pairs, 3u);
  EXPECT_NEAR(cells[2].correctness_agreement, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(cells[2].relevance_agreement, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(iaa_csv(cells).substr(0, 48), "contract_type,n_pairs,correctness_iaa,relevance_");
}

TEST(Iaa, GuidedAbsentScoresAgree) {
  const std::vector<HumanReview> a = {guided("q1", "a", 0, 0, 0, 1), guided("q2", "a", 3, 0, 0, 0)};
  const std::vector<HumanReview> b = {guided("q1", "b", 0, 0, 0, 3), guided("q2", "b", 3, 0, 1, 0)};
  const auto cells = iaa(a, b);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].correctness_matches, 2u);
  EXPECT_EQ(cells[0].relevance_matches, 1u);
}

TEST(Iaa, Errors) {
  const std::vector<HumanReview> a = {manual("q1", "a", 5, 5)};
  const std::vector<HumanReview> other = {manual("q2", "b", 5, 5)};
  const std::vector<HumanReview> twice = {manual("q1", "b", 5, 5), manual("q1", "b", 4, 4)};
  const std::vector<HumanReview> invalid = {manual("q1", "b", 9, 5)};
  const std::vector<HumanReview> none;
  EXPECT_EQ(code_of([&] { (void)iaa(a, other); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { (void)iaa(a, twice); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { (void)iaa(a, invalid); }), ErrorCode::kValidation);
  EXPECT_EQ(code_of([&] { (void)iaa(none, none); }), ErrorCode::kInsufficientData);
  IAAOptions options;
  options.group_by_contract_type = true;
  EXPECT_EQ(code_of([&] { (void)iaa(a, a, options); }), ErrorCode::kNotFound);
}

TEST(CorrelationReport, OneRowPerMethod) {
  const std::vector<QuarterScore> human = {QuarterScore::from_value(0.0), QuarterScore::from_value(0.5),
                                           QuarterScore::from_value(0.75), QuarterScore::from_value(1.0)};
  const auto rows = correlation_report({{"judge", {0.1, 0.55, 0.8, 1.0}}, {"bleu", {0.9, 0.2, 0.3, 0.1}}}, human);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].method, "judge");
  EXPECT_GT(rows[0].correlation.r, 0.9);
  EXPECT_DOUBLE_EQ(rows[0].bucketed_accuracy, 1.0);
  EXPECT_LT(rows[1].correlation.r, 0.0);
  EXPECT_EQ(to_json_value(rows).size(), 2u);
  EXPECT_EQ(correlation_csv(rows).substr(0, 6), "method");
}

}  // namespace
}  // namespace ldpjudge
