#include "warnbench/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "warnbench/error.hpp"
#include "warnbench/text.hpp"

namespace warnbench {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.provider_id != b.provider_id) {
    throw PreconditionError("cannot compare embeddings from providers \"" +
                            a.provider_id + "\" and \"" + b.provider_id + "\"");
  }
  if (a.values.size() != b.values.size()) {
    throw PreconditionError("embedding dimension mismatch: " +
                            std::to_string(a.values.size()) + " vs " +
                            std::to_string(b.values.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw PreconditionError("cosine similarity of a zero vector is undefined");
  }
  // sqrt(na) * sqrt(nb) is commutative, so the result is exactly symmetric.
  double s = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(s, -1.0, 1.0);
}

std::vector<EmbeddingVector> Embedder::embed_batch(
    std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ < 8) {
    throw PreconditionError("embedding dimension must be at least 8");
  }
}

std::string HashingEmbedder::provider_id() const {
  return "hashing-bow-" + std::to_string(dimension_);
}

std::size_t HashingEmbedder::bucket_of(std::string_view token) const {
  return static_cast<std::size_t>(text::fnv1a64(token) % dimension_);
}

EmbeddingVector HashingEmbedder::embed(std::string_view input) {
  if (text::trim(input).empty()) {
    throw PreconditionError("cannot embed blank text");
  }
  EmbeddingVector v{std::vector<double>(dimension_, 0.0), provider_id()};
  for (const auto& tok : text::tokenize(input)) v.values[bucket_of(tok)] += 1.0;

  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
  } else {
    // Only punctuation: every such text maps onto the same fixed direction.
    v.values[0] = 1.0;
  }
  return v;
}

HttpEmbedder::HttpEmbedder(HttpEndpoint endpoint, std::string provider_id)
    : poster_(std::move(endpoint)), provider_id_(std::move(provider_id)) {
  if (provider_id_.empty()) provider_id_ = "http:" + poster_.endpoint().url;
}

EmbeddingVector HttpEmbedder::embed(std::string_view input) {
  std::string s(input);
  return embed_batch(std::span<const std::string>(&s, 1)).front();
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(
    std::span<const std::string> texts) {
  for (const auto& t : texts) {
    if (text::trim(t).empty()) {
      throw PreconditionError("cannot embed blank text");
    }
  }
  if (texts.empty()) return {};

  nlohmann::json response;
  try {
    response = poster_.post({{"texts", texts}});
  } catch (const BackendError& e) {
    throw BackendError(std::string("embedding service failed: ") + e.what(),
                       e.retryable());
  }
  auto vectors = response.find("vectors");
  if (vectors == response.end() || !vectors->is_array() ||
      vectors->size() != texts.size()) {
    throw BackendError("embedding service returned a malformed response", false);
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& row : *vectors) {
    EmbeddingVector v{{}, provider_id_};
    try {
      v.values = row.get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw BackendError("embedding service returned a non-numeric vector", false);
    }
    if (v.values.size() < 8 ||
        !std::all_of(v.values.begin(), v.values.end(),
                     [](double x) { return std::isfinite(x); })) {
      throw BackendError("embedding service returned an invalid vector", false);
    }
    std::size_t expected = 0;
    dimension_.compare_exchange_strong(expected, v.values.size());
    if (v.values.size() != dimension_.load()) {
      throw BackendError("embedding service changed vector dimension", false);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const nlohmann::json& config) {
  const auto kind = config.value("kind", std::string("hashing"));
  if (kind == "hashing") {
    return std::make_unique<HashingEmbedder>(
        config.value("dimension", HashingEmbedder::kDefaultDimension));
  }
  if (kind == "http") {
    HttpEndpoint ep;
    ep.url = config.at("endpoint").get<std::string>();
    ep.api_key_env = config.value("api_key_env", std::string{});
    ep.timeout = std::chrono::milliseconds(
        static_cast<long long>(config.value("timeout_s", 30.0) * 1000));
    ep.max_in_flight = config.value("max_in_flight", 4);
    return std::make_unique<HttpEmbedder>(
        std::move(ep), config.value("provider_id", std::string{}));
  }
  throw PreconditionError("unknown embedder kind \"" + kind + "\"");
}

}  // namespace warnbench
