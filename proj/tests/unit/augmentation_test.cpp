#include <gtest/gtest.h>

#include "ldpjudge/augmentation.hpp"
#include "ldpjudge/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace ldpjudge {
namespace {

using namespace std::chrono_literals;
using testing::make_evaluation;

const QAPair kQa{"q1", "c1", "What are the key terms?",
                 "The initial term is 24 months. The agreement is governed by the laws of Delaware.",
                 "The term is 24 months [par_2]. Delaware law governs [par_9]."};

Evaluation base_evaluation() {
  return make_evaluation("q1", Actor::kHuman,
                         {{"The initial term is 24 months.", Tag::kCorrect},
                          {"The agreement is governed by the laws of Delaware.", Tag::kCorrect},
                          {"Either party may renew by written notice.", Tag::kMissing}});
}

Augmenter mock_augmenter(Responder responder = mock_response) {
  auto transport = std::make_shared<ScriptedTransport>(std::move(responder));
  return Augmenter(std::make_shared<ChatClient>(transport, 0, 1ms));
}

oracle::Counts as_counts(const TagCounts& t) { return {t.n_correct, t.n_incorrect, t.n_irrelevant, t.n_missing}; }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

TEST(Kinds, RoundTripNames) {
  for (auto kind : kAllAugmentationKinds) EXPECT_EQ(parse_augmentation_kind(to_string(kind)), kind);
  EXPECT_FALSE(parse_augmentation_kind("shuffle"));
}

TEST(LocateSpan, FindsLdpTextIgnoringCase) {
  const auto span = locate_span(kQa.answer, "the initial term is 24 months.");
  ASSERT_TRUE(span);
  EXPECT_EQ(span->pos, 0u);
  EXPECT_FALSE(locate_span(kQa.answer, "A clause that is not there."));
}

TEST(Augmenter, EveryKindMovesCountsAsExpected) {
  const auto augmenter = mock_augmenter();
  const auto evaluation = base_evaluation();
  const auto before = tag_counts(evaluation);
  for (auto kind : kAllAugmentationKinds) {
    SCOPED_TRACE(std::string(to_string(kind)));
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto ex = augmenter.apply(kind, kQa, evaluation, seed);
      EXPECT_EQ(ex.kind, kind);
      EXPECT_EQ(ex.original_qa_id, "q1");
      EXPECT_EQ(ex.qa.id, "q1:" + std::string(to_string(kind)));
      EXPECT_EQ(ex.evaluation.qa_id, ex.qa.id);
      EXPECT_NE(ex.qa.answer, kQa.answer);
      EXPECT_FALSE(ex.edit_log.empty());
      const auto after = tag_counts(ex.evaluation);
      EXPECT_EQ(after, expected_counts(kind, before, ex.added_assertions));
      EXPECT_EQ(as_counts(after),
                oracle::augmented_counts(std::string(to_string(kind)), as_counts(before),
                                         static_cast<long>(ex.added_assertions)));
      EXPECT_TRUE(check_consistency(ex, kQa, evaluation).empty());
    }
  }
}

TEST(Augmenter, RemoveInfoDropsTheSentence) {
  const auto ex = mock_augmenter().remove_info(kQa, base_evaluation(), 0);
  const auto removed = std::count_if(ex.evaluation.ldps.begin(), ex.evaluation.ldps.end(),
                                     [](const auto& l) { return l.tag == Tag::kMissing; });
  EXPECT_EQ(removed, 2);
  EXPECT_LT(ex.qa.answer.size(), kQa.answer.size());
}

TEST(Augmenter, ChangeValueEditsAnswerAndLdpTogether) {
  const auto ex = mock_augmenter().change_value(kQa, base_evaluation(), 1);
  for (const auto& ldp : ex.evaluation.ldps) {
    if (ldp.tag == Tag::kIncorrect) {
      EXPECT_TRUE(locate_span(ex.qa.answer, ldp.text)) << ldp.text;
    }
  }
  const bool changed_number = ex.qa.answer.find(" 9 months") != std::string::npos;
  const bool changed_name = ex.qa.answer.find("Texas") != std::string::npos;
  EXPECT_TRUE(changed_number != changed_name);
}

TEST(Augmenter, ContradictingInfoNeedsGroundTruth) {
  QAPair qa = kQa;
  qa.ground_truth.reset();
  EXPECT_EQ(code_of([&] { (void)mock_augmenter().contradicting_info(qa, base_evaluation(), 0); }),
            ErrorCode::kPrecondition);
}

TEST(Augmenter, ContradictingInfoAddsOneAssertionPerLine) {
  const auto ex = mock_augmenter().contradicting_info(kQa, base_evaluation(), 0);
  EXPECT_EQ(ex.added_assertions, 2u);
  EXPECT_EQ(tag_counts(ex.evaluation), (TagCounts{0, 2, 0, 3}));
}

TEST(Augmenter, PreconditionsWithoutLocatableCorrectLdps) {
  const auto off_text = make_evaluation("q1", Actor::kHuman, {{"Something unrelated.", Tag::kCorrect}});
  const auto augmenter = mock_augmenter();
  EXPECT_EQ(code_of([&] { (void)augmenter.remove_info(kQa, off_text, 0); }), ErrorCode::kPrecondition);
  EXPECT_EQ(code_of([&] { (void)augmenter.incomplete_info(kQa, off_text, 0); }), ErrorCode::kPrecondition);
  QAPair plain{"q2", "c1", "Q?", "The parties agree to cooperate.", std::nullopt};
  const auto e = make_evaluation("q2", Actor::kHuman, {{"The parties agree to cooperate.", Tag::kCorrect}});
  EXPECT_EQ(code_of([&] { (void)augmenter.change_value(plain, e, 0); }), ErrorCode::kPrecondition);
}

TEST(Augmenter, RemoveInfoNeedsNoClient) {
  Augmenter offline(nullptr);
  EXPECT_NO_THROW((void)offline.remove_info(kQa, base_evaluation(), 0));
  EXPECT_EQ(code_of([&] { (void)offline.add_extra_info(kQa, base_evaluation(), 0); }),
            ErrorCode::kPrecondition);
}

TEST(Augmenter, UnusableProviderRepliesAreRejected) {
  const auto echo = mock_augmenter([](const ChatRequest& r) {
    if (r.purpose == RequestPurpose::kIncompleteInfo) return r.context.at("span");
    if (r.purpose == RequestPurpose::kChangeValue) return r.context.at("value");
    if (r.purpose == RequestPurpose::kAddExtraInfo) return std::string("One. Two. Three.");
    return std::string("\n\n");
  });
  const auto e = base_evaluation();
  EXPECT_EQ(code_of([&] { (void)echo.incomplete_info(kQa, e, 0); }), ErrorCode::kProviderResponse);
  EXPECT_EQ(code_of([&] { (void)echo.change_value(kQa, e, 0); }), ErrorCode::kProviderResponse);
  EXPECT_EQ(code_of([&] { (void)echo.add_extra_info(kQa, e, 0); }), ErrorCode::kProviderResponse);
  EXPECT_EQ(code_of([&] { (void)echo.contradicting_info(kQa, e, 0); }), ErrorCode::kProviderResponse);
}

TEST(Augmenter, SameSeedSameResult) {
  const auto augmenter = mock_augmenter();
  const auto a = augmenter.change_value(kQa, base_evaluation(), 42);
  const auto b = augmenter.change_value(kQa, base_evaluation(), 42);
  EXPECT_EQ(a.qa, b.qa);
  EXPECT_EQ(a.evaluation, b.evaluation);
}

TEST(EditLog, CsvQuotesFields) {
  const auto ex = mock_augmenter().remove_info(kQa, base_evaluation(), 0);
  const auto csv = edit_log_csv({ex});
  EXPECT_EQ(csv.rfind("kind,original_qa_id,qa_id,edit_log\n", 0), 0u);
  EXPECT_NE(csv.find("remove_info,q1,q1:remove_info,\""), std::string::npos);
  const auto j = to_json_value(ex);
  EXPECT_EQ(j.at("kind"), "remove_info");
}

}  // namespace
}  // namespace ldpjudge
