#include "ldpjudge/alignment.hpp"

#include <algorithm>
#include <numeric>

#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"

namespace ldpjudge {

namespace {

constexpr double kThresholdSlack = 1e-12;

std::vector<std::string> texts_of(const std::vector<LegalDataPoint>& ldps) {
  std::vector<std::string> out;
  out.reserve(ldps.size());
  for (const auto& ldp : ldps) out.push_back(ldp.text);
  return out;
}

void check_config(const AlignConfig& config) {
  if (auto violations = validate(config); !violations.empty()) {
    throw Error(ErrorCode::kInvalidArgument, violations.front().message,
                {{"path", violations.front().path}});
  }
}

}  // namespace

SimilarityMatrix similarity_matrix(std::span<const EmbeddingVector> machine,
                                   std::span<const EmbeddingVector> human) {
  SimilarityMatrix sim;
  sim.rows = machine.size();
  sim.cols = human.size();
  sim.values.resize(sim.rows * sim.cols);
  for (std::size_t i = 0; i < sim.rows; ++i) {
    for (std::size_t j = 0; j < sim.cols; ++j) {
      sim.values[i * sim.cols + j] = cosine_similarity(machine[i], human[j]);
    }
  }
  return sim;
}

std::vector<MatchedIndex> greedy_match(const SimilarityMatrix& similarity, double threshold) {
  if (similarity.values.size() != similarity.rows * similarity.cols) {
    throw Error(ErrorCode::kInvalidArgument, "similarity matrix shape does not match its values");
  }
  std::vector<MatchedIndex> candidates;
  for (std::size_t i = 0; i < similarity.rows; ++i) {
    for (std::size_t j = 0; j < similarity.cols; ++j) {
      const double s = similarity.at(i, j);
      if (s >= threshold - kThresholdSlack) candidates.push_back({i, j, s});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const MatchedIndex& a, const MatchedIndex& b) {
                     if (a.similarity != b.similarity) return a.similarity > b.similarity;
                     if (a.machine != b.machine) return a.machine < b.machine;
                     return a.human < b.human;
                   });
  std::vector<bool> row_used(similarity.rows, false);
  std::vector<bool> col_used(similarity.cols, false);
  std::vector<MatchedIndex> out;
  for (const auto& c : candidates) {
    if (row_used[c.machine] || col_used[c.human]) continue;
    row_used[c.machine] = true;
    col_used[c.human] = true;
    out.push_back(c);
  }
  return out;
}

AlignmentReport match_ldps(const Evaluation& machine, const Evaluation& human,
                           const SimilarityMatrix& similarity, const AlignConfig& config) {
  check_config(config);
  if (machine.qa_id != human.qa_id) {
    throw Error(ErrorCode::kInvalidArgument, "evaluations refer to different qa_ids",
                {{"machine", machine.qa_id}, {"human", human.qa_id}});
  }
  if (similarity.rows != machine.ldps.size() || similarity.cols != human.ldps.size()) {
    throw Error(ErrorCode::kInvalidArgument, "similarity matrix does not fit the evaluations");
  }
  AlignmentReport report;
  report.qa_id = machine.qa_id;
  report.similarity_threshold = config.similarity_threshold;
  report.adjusted_text_threshold = config.adjusted_text_threshold;

  std::vector<bool> machine_used(machine.ldps.size(), false);
  std::vector<bool> human_used(human.ldps.size(), false);
  for (const auto& m : greedy_match(similarity, config.similarity_threshold)) {
    machine_used[m.machine] = true;
    human_used[m.human] = true;
    report.pairs.push_back(
        {machine.ldps[m.machine], human.ldps[m.human], m.machine, m.human, m.similarity});
  }
  for (std::size_t i = 0; i < machine.ldps.size(); ++i) {
    if (!machine_used[i]) report.unmatched_machine.push_back(machine.ldps[i]);
  }
  for (std::size_t j = 0; j < human.ldps.size(); ++j) {
    if (!human_used[j]) report.unmatched_human.push_back(human.ldps[j]);
  }
  return report;
}

AlignmentReport match_ldps(const Evaluation& machine, const Evaluation& human,
                           Embedder& embedder, const AlignConfig& config) {
  if (machine.qa_id != human.qa_id) {
    throw Error(ErrorCode::kInvalidArgument, "evaluations refer to different qa_ids",
                {{"machine", machine.qa_id}, {"human", human.qa_id}});
  }
  SimilarityMatrix sim;
  sim.rows = machine.ldps.size();
  sim.cols = human.ldps.size();
  if (sim.rows > 0 && sim.cols > 0) {
    // One embedding call so both sides share a model and dimension.
    std::vector<std::string> texts = texts_of(machine.ldps);
    const auto human_texts = texts_of(human.ldps);
    texts.insert(texts.end(), human_texts.begin(), human_texts.end());
    const auto vectors = embedder.embed(texts);
    if (vectors.size() != texts.size()) {
      throw Error(ErrorCode::kProviderResponse, "embedder returned the wrong number of vectors");
    }
    sim = similarity_matrix(std::span(vectors).first(sim.rows),
                            std::span(vectors).subspan(sim.rows));
  }
  return match_ldps(machine, human, sim, config);
}

AlignmentScores alignment_score(const AlignmentReport& report) {
  const std::size_t denominator = report.denominator();
  if (denominator == 0) {
    throw Error(ErrorCode::kInsufficientData, "both evaluations are empty");
  }
  std::size_t agree = 0;
  std::size_t agree_adjusted = 0;
  for (const auto& pair : report.pairs) {
    if (pair.machine.tag != pair.human.tag) continue;
    ++agree;
    if (pair.similarity >= report.adjusted_text_threshold - kThresholdSlack) ++agree_adjusted;
  }
  std::size_t unmatched_agree = 0;
  for (const auto& ldp : report.unmatched_machine) {
    if (ldp.tag == Tag::kIrrelevant) ++unmatched_agree;
  }
  for (const auto& ldp : report.unmatched_human) {
    if (ldp.tag == Tag::kMissing) ++unmatched_agree;
  }
  const double d = static_cast<double>(denominator);
  return {static_cast<double>(agree + unmatched_agree) / d,
          static_cast<double>(agree_adjusted + unmatched_agree) / d};
}

AlignmentReport align(const Evaluation& machine, const Evaluation& human, Embedder& embedder,
                      const AlignConfig& config) {
  AlignmentReport report = match_ldps(machine, human, embedder, config);
  const auto scores = alignment_score(report);
  report.accuracy = scores.accuracy;
  report.adjusted_accuracy = scores.adjusted_accuracy;
  return report;
}

nlohmann::json to_json_value(const AlignmentReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"machine_index", p.machine_index},
                     {"human_index", p.human_index},
                     {"similarity", p.similarity},
                     {"machine", p.machine},
                     {"human", p.human}});
  }
  return {{"qa_id", report.qa_id},
          {"pairs", pairs},
          {"unmatched_machine", report.unmatched_machine},
          {"unmatched_human", report.unmatched_human},
          {"accuracy", report.accuracy},
          {"adjusted_accuracy", report.adjusted_accuracy},
          {"similarity_threshold", report.similarity_threshold},
          {"adjusted_text_threshold", report.adjusted_text_threshold}};
}

}  // namespace ldpjudge
