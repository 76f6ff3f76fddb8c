#include <algorithm>
#include <cmath>
#include <future>

#include <fmt/format.h>

#include "http_client.hpp"
#include "ldpjudge/alignment.hpp"
#include "ldpjudge/error.hpp"

namespace ldpjudge {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimensions differ",
                {{"a", a.values.size()}, {"b", b.values.size()}});
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kInvalidArgument, "zero-norm embedding");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

HashingEmbedder::HashingEmbedder(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension), model_id_(fmt::format("hashing-trigram-{}", dimension)) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be > 0");
}

EmbeddingVector HashingEmbedder::embed_one(std::string_view text) const {
  const std::string padded = "  " + to_lower_ascii(trim(text)) + "  ";
  EmbeddingVector out;
  out.model_id = model_id_;
  out.values.assign(dimension_, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::uint64_t hash = 0xcbf29ce484222325ULL ^ seed_;
    for (std::size_t k = 0; k < 3; ++k) {
      hash ^= static_cast<unsigned char>(padded[i + k]);
      hash *= 0x100000001b3ULL;
    }
    out.values[hash % dimension_] += 1.0;
  }
  double norm = 0.0;
  for (double v : out.values) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : out.values) v /= norm;
  return out;
}

std::vector<EmbeddingVector> HashingEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to embed");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(embed_one(text));
  return out;
}

Violations validate(const AlignConfig& config) {
  Violations out;
  auto unit_open = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!unit_open(config.similarity_threshold)) {
    out.push_back({"similarity_threshold", "similarity_threshold in (0,1]"});
  }
  if (!unit_open(config.adjusted_text_threshold)) {
    out.push_back({"adjusted_text_threshold", "adjusted_text_threshold in (0,1]"});
  }
  if (config.adjusted_text_threshold < config.similarity_threshold) {
    out.push_back({"adjusted_text_threshold", "adjusted_text_threshold >= similarity_threshold"});
  }
  if (config.parallelism < 1) out.push_back({"parallelism", "parallelism >= 1"});
  if (config.batch_size < 1) out.push_back({"batch_size", "batch_size >= 1"});
  return out;
}

HttpEmbedder::HttpEmbedder(AlignConfig config) : config_(std::move(config)) {}

std::vector<EmbeddingVector> HttpEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to embed");
  std::vector<EmbeddingVector> out(texts.size());

  auto run_batch = [&](std::size_t begin, std::size_t end) {
    nlohmann::json body = {{"model", config_.model_id},
                           {"input", std::vector<std::string>(texts.begin() + begin,
                                                              texts.begin() + end)}};
    auto reply = detail::post_json(config_.endpoint_url, body, config_.api_key_ref,
                                   config_.request_timeout);
    const auto& data = reply.body.value("data", nlohmann::json::array());
    if (!data.is_array() || data.size() != end - begin) {
      throw Error(ErrorCode::kProviderResponse, "embedding reply has the wrong number of vectors");
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      // Providers may return entries out of order; "index" is authoritative.
      const std::size_t slot = data[k].value("index", k);
      if (slot >= end - begin) throw Error(ErrorCode::kProviderResponse, "embedding index out of range");
      EmbeddingVector v;
      v.model_id = config_.model_id;
      try {
        v.values = data[k].at("embedding").get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::kProviderResponse, "embedding reply lacks a vector");
      }
      out[begin + slot] = std::move(v);
    }
  };

  std::vector<std::future<void>> in_flight;
  for (std::size_t begin = 0; begin < texts.size(); begin += config_.batch_size) {
    const std::size_t end = std::min(texts.size(), begin + config_.batch_size);
    if (in_flight.size() >= static_cast<std::size_t>(config_.parallelism)) {
      in_flight.front().get();
      in_flight.erase(in_flight.begin());
    }
    in_flight.push_back(std::async(std::launch::async, run_batch, begin, end));
  }
  for (auto& f : in_flight) f.get();

  const std::size_t dimension = out.front().values.size();
  for (const auto& v : out) {
    if (v.values.empty() || v.values.size() != dimension) {
      throw Error(ErrorCode::kProviderResponse, "embedding dimensions differ within one run");
    }
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const AlignConfig& config) {
  if (config.endpoint_url.empty()) return std::make_unique<HashingEmbedder>();
  return std::make_unique<HttpEmbedder>(config);
}

}  // namespace ldpjudge
