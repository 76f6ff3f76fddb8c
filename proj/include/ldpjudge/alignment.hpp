#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpjudge/domain.hpp"

namespace ldpjudge {

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// One vector per text, in input order. Throws Error(kInvalidArgument) on an
  /// empty list.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Offline embedder: character trigrams of the lowercased, space-padded text
/// are hashed (FNV-1a, seeded) into `dimension` buckets and the counts are
/// unit-normalized. Counts are non-negative so every vector has non-zero norm.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::uint64_t seed = 0x5eed, std::size_t dimension = 1024);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  EmbeddingVector embed_one(std::string_view text) const;

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
  std::string model_id_;
};

struct AlignConfig {
  double similarity_threshold = 0.80;     // pairs below this never match
  double adjusted_text_threshold = 0.90;  // pairs must reach this to count in adjusted accuracy
  std::string endpoint_url;               // empty -> offline HashingEmbedder
  std::string model_id = "hashing-trigram-1024";
  std::string api_key_ref;
  int parallelism = 1;
  std::size_t batch_size = 64;
  std::chrono::milliseconds request_timeout{60000};
};

Violations validate(const AlignConfig& config);

/// Embeddings endpoint: POST {model, input: [texts]} -> data[i].embedding.
/// Texts are sent in batches of `batch_size`, at most `parallelism` in flight.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(AlignConfig config);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

 private:
  AlignConfig config_;
};

/// HttpEmbedder when config.endpoint_url is set, otherwise HashingEmbedder.
std::unique_ptr<Embedder> make_embedder(const AlignConfig& config);

/// Row-major machine x human similarity matrix.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

SimilarityMatrix similarity_matrix(std::span<const EmbeddingVector> machine,
                                   std::span<const EmbeddingVector> human);

struct MatchedIndex {
  std::size_t machine = 0;
  std::size_t human = 0;
  double similarity = 0.0;

  friend bool operator==(const MatchedIndex&, const MatchedIndex&) = default;
};

/// Repeatedly takes the highest remaining similarity >= threshold among
/// unused rows and columns. Ties go to the lexicographically smaller
/// (machine, human) index pair. Result is in selection order.
std::vector<MatchedIndex> greedy_match(const SimilarityMatrix& similarity, double threshold);

struct AlignedPair {
  LegalDataPoint machine;
  LegalDataPoint human;
  std::size_t machine_index = 0;
  std::size_t human_index = 0;
  double similarity = 0.0;
};

struct AlignmentReport {
  std::string qa_id;
  std::vector<AlignedPair> pairs;
  std::vector<LegalDataPoint> unmatched_machine;
  std::vector<LegalDataPoint> unmatched_human;
  double accuracy = 0.0;
  double adjusted_accuracy = 0.0;
  double similarity_threshold = 0.0;
  double adjusted_text_threshold = 0.0;

  std::size_t denominator() const {
    return pairs.size() + unmatched_machine.size() + unmatched_human.size();
  }
};

nlohmann::json to_json_value(const AlignmentReport& report);

/// Pairs and unmatched remainders only; accuracies are left at zero.
AlignmentReport match_ldps(const Evaluation& machine, const Evaluation& human,
                           Embedder& embedder, const AlignConfig& config);
AlignmentReport match_ldps(const Evaluation& machine, const Evaluation& human,
                           const SimilarityMatrix& similarity, const AlignConfig& config);

struct AlignmentScores {
  double accuracy = 0.0;
  double adjusted_accuracy = 0.0;
};

/// Pair agrees iff tags are equal (adjusted: and similarity >= the adjusted
/// threshold); an unmatched machine LDP agrees iff tagged Irrelevant; an
/// unmatched human LDP agrees iff tagged Missing.
AlignmentScores alignment_score(const AlignmentReport& report);

/// match_ldps followed by alignment_score.
AlignmentReport align(const Evaluation& machine, const Evaluation& human, Embedder& embedder,
                      const AlignConfig& config);

}  // namespace ldpjudge
