#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "ldpjudge/alignment.hpp"
#include "ldpjudge/error.hpp"
#include "local_server.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace ldpjudge {
namespace {

using testing::make_evaluation;

SimilarityMatrix matrix(const std::vector<std::vector<double>>& rows) {
  SimilarityMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  return m;
}

TEST(Cosine, BasicProperties) {
  const EmbeddingVector a{{1, 0, 0}, "m"};
  const EmbeddingVector b{{0, 2, 0}, "m"};
  const EmbeddingVector c{{3, 0, 0}, "m"};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, c), 1.0);
  EXPECT_THROW(cosine_similarity(a, EmbeddingVector{{1, 0}, "m"}), Error);
  EXPECT_THROW(cosine_similarity(a, EmbeddingVector{{0, 0, 0}, "m"}), Error);
}

TEST(HashingEmbedder, DeterministicAndCaseInsensitive) {
  HashingEmbedder e1, e2;
  const auto a = e1.embed_one("The Term is two years.");
  EXPECT_EQ(a, e2.embed_one("the term is two years."));
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
  EXPECT_EQ(a.values.size(), 1024u);
  EXPECT_EQ(a.model_id, "hashing-trigram-1024");
  EXPECT_LT(cosine_similarity(a, e1.embed_one("Governing law is Delaware.")), 0.5);
  EXPECT_NE(HashingEmbedder(7).embed_one("x"), HashingEmbedder(8).embed_one("x"));
}

TEST(HashingEmbedder, RejectsEmptyBatchesAndZeroDimension) {
  HashingEmbedder e;
  EXPECT_THROW(e.embed(std::vector<std::string>{}), Error);
  EXPECT_THROW(HashingEmbedder(1, 0), Error);
}

TEST(GreedyMatch, PicksHighestFirstAndRespectsThreshold) {
  const auto pairs = greedy_match(matrix({{0.95, 0.85}, {0.90, 0.70}}), 0.80);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (MatchedIndex{0, 0, 0.95}));
  const auto loose = greedy_match(matrix({{0.95, 0.85}, {0.90, 0.70}}), 0.50);
  ASSERT_EQ(loose.size(), 2u);
  EXPECT_EQ(loose[1], (MatchedIndex{1, 1, 0.70}));
}

TEST(GreedyMatch, ThresholdIsInclusiveAndExcludesBelow) {
  const auto pairs = greedy_match(matrix({{0.80, 0.79}, {0.0, 0.0}}), 0.80);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].human, 0u);
}

TEST(GreedyMatch, TiesBreakByRowThenColumn) {
  const auto pairs = greedy_match(matrix({{0.9, 0.9}, {0.9, 0.9}}), 0.5);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], (MatchedIndex{0, 0, 0.9}));
  EXPECT_EQ(pairs[1], (MatchedIndex{1, 1, 0.9}));
}

TEST(GreedyMatch, MatchesLexicographicOptimumOnRandomMatrices) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 4);
  std::vector<int> grid(21);
  std::iota(grid.begin(), grid.end(), 0);
  for (int trial = 0; trial < 400; ++trial) {
    const int rows = dim(rng), cols = dim(rng);
    std::shuffle(grid.begin(), grid.end(), rng);
    std::vector<std::vector<double>> s(rows, std::vector<double>(cols));
    auto next = grid.begin();
    for (auto& row : s) {
      for (auto& v : row) v = *next++ / 20.0;
    }
    const auto got = greedy_match(matrix(s), 0.5);
    const auto want = oracle::lexicographic_best_matching(s, 0.5);
    std::vector<double> got_key, want_key;
    for (const auto& p : got) got_key.push_back(p.similarity);
    for (const auto& p : want) want_key.push_back(s[p.row][p.col]);
    std::sort(got_key.rbegin(), got_key.rend());
    std::sort(want_key.rbegin(), want_key.rend());
    EXPECT_EQ(got_key, want_key) << "trial " << trial;
  }
}

TEST(GreedyMatch, CanFallShortOfTheMaximumTotal) {
  const std::vector<std::vector<double>> s = {{0.9, 0.8}, {0.8, 0.1}};
  const auto pairs = greedy_match(matrix(s), 0.05);
  double total = 0.0;
  for (const auto& p : pairs) total += p.similarity;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(oracle::max_sum_matching(s, 0.05), 1.6, 1e-12);
}

TEST(GreedyMatch, RejectsInconsistentShape) {
  SimilarityMatrix m;
  m.rows = 2;
  m.cols = 2;
  m.values = {1.0};
  EXPECT_THROW(greedy_match(m, 0.5), Error);
}

TEST(Alignment, ScoresAgreementIncludingUnmatched) {
  const auto machine = make_evaluation("q", Actor::kMachine,
                                       {{"a", Tag::kCorrect}, {"b", Tag::kIrrelevant}, {"c", Tag::kCorrect},
                                        {"x", Tag::kIrrelevant}});
  const auto human = make_evaluation("q", Actor::kHuman,
                                     {{"a", Tag::kCorrect}, {"b", Tag::kCorrect}, {"c", Tag::kCorrect},
                                      {"y", Tag::kMissing}});
  const auto sim = matrix({{1.0, 0.1, 0.1, 0.1},
                           {0.1, 0.95, 0.1, 0.1},
                           {0.1, 0.1, 0.85, 0.1},
                           {0.1, 0.1, 0.1, 0.1}});
  AlignConfig config;
  const auto report = match_ldps(machine, human, sim, config);
  ASSERT_EQ(report.pairs.size(), 3u);
  EXPECT_EQ(report.unmatched_machine.size(), 1u);
  EXPECT_EQ(report.unmatched_human.size(), 1u);
  EXPECT_EQ(report.denominator(), 5u);
  const auto scores = alignment_score(report);
  EXPECT_NEAR(scores.accuracy, 4.0 / 5.0, 1e-15);
  EXPECT_NEAR(scores.adjusted_accuracy, 3.0 / 5.0, 1e-15);
}

TEST(Alignment, IdenticalEvaluationsAgreeFully) {
  const auto e = make_evaluation("q", Actor::kMachine,
                                 {{"The term is two years.", Tag::kCorrect},
                                  {"Payment is due within thirty days.", Tag::kIncorrect}});
  auto h = e;
  h.evaluator_kind = Actor::kHuman;
  for (auto& ldp : h.ldps) ldp.source = Actor::kHuman;
  HashingEmbedder embedder;
  const auto report = align(e, h, embedder, {});
  EXPECT_EQ(report.pairs.size(), 2u);
  EXPECT_DOUBLE_EQ(report.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(report.adjusted_accuracy, 1.0);
  const auto j = to_json_value(report);
  EXPECT_EQ(j.at("pairs").size(), 2u);
  EXPECT_EQ(j.at("qa_id"), "q");
}

TEST(Alignment, Errors) {
  HashingEmbedder embedder;
  const auto a = make_evaluation("q1", Actor::kMachine, {{"a", Tag::kCorrect}});
  const auto b = make_evaluation("q2", Actor::kHuman, {{"a", Tag::kCorrect}});
  EXPECT_THROW(align(a, b, embedder, {}), Error);
  AlignConfig bad;
  bad.similarity_threshold = 0.95;
  bad.adjusted_text_threshold = 0.9;
  EXPECT_FALSE(validate(bad).empty());
  auto b1 = b;
  b1.qa_id = "q1";
  EXPECT_THROW(align(a, b1, embedder, bad), Error);
  AlignmentReport empty;
  EXPECT_EQ(([&] {
              try {
                (void)alignment_score(empty);
              } catch (const Error& e) {
                return e.code();
              }
              return ErrorCode::kIo;
            })(),
            ErrorCode::kInsufficientData);
}

TEST(HttpEmbedder, ReordersByIndexAndBatches) {
  testing::LocalServer server;
  std::atomic<int> calls{0};
  server.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    const auto& input = body.at("input");
    for (std::size_t k = input.size(); k-- > 0;) {
      const double len = static_cast<double>(input[k].get<std::string>().size());
      data.push_back({{"index", k}, {"embedding", {len, 1.0}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  server.start();
  AlignConfig config;
  config.endpoint_url = server.url("/v1/embeddings");
  config.batch_size = 2;
  config.parallelism = 2;
  HttpEmbedder embedder(config);
  const std::vector<std::string> texts = {"a", "bb", "ccc", "dddd", "eeeee"};
  const auto vectors = embedder.embed(texts);
  ASSERT_EQ(vectors.size(), 5u);
  for (std::size_t k = 0; k < texts.size(); ++k) {
    EXPECT_EQ(vectors[k].values[0], static_cast<double>(texts[k].size()));
  }
  EXPECT_EQ(calls, 3);
}

TEST(HttpEmbedder, WrongVectorCountIsAProviderError) {
  testing::LocalServer server;
  server.server().Post("/e", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"data":[]})", "application/json");
  });
  server.start();
  AlignConfig config;
  config.endpoint_url = server.url("/e");
  HttpEmbedder embedder(config);
  try {
    (void)embedder.embed(std::vector<std::string>{"a"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderResponse);
  }
}

TEST(MakeEmbedder, OfflineWithoutEndpoint) {
  EXPECT_NE(dynamic_cast<HashingEmbedder*>(make_embedder({}).get()), nullptr);
  AlignConfig config;
  config.endpoint_url = "http://127.0.0.1:1/e";
  EXPECT_NE(dynamic_cast<HttpEmbedder*>(make_embedder(config).get()), nullptr);
}

}  // namespace
}  // namespace ldpjudge
