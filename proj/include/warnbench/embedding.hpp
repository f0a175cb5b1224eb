#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/http.hpp"

namespace warnbench {

struct EmbeddingVector {
  std::vector<double> values;
  std::string provider_id;

  std::size_t dimension() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Throws on provider mismatch, dimension mismatch or a zero vector. The
// result is clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string provider_id() const = 0;
  virtual std::size_t dimension() const = 0;

  // Throws PreconditionError for blank text, BackendError for provider
  // failures.
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts);
};

// Feature-hashing bag of words: lowercase punctuation-stripped tokens are
// hashed into `dimension` buckets, counts are L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashingEmbedder(std::size_t dimension = kDefaultDimension);

  std::string provider_id() const override;
  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) override;

  std::size_t bucket_of(std::string_view token) const;

 private:
  std::size_t dimension_;
};

// POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(HttpEndpoint endpoint, std::string provider_id);

  std::string provider_id() const override { return provider_id_; }
  // Learned from the first response; 0 before any call.
  std::size_t dimension() const override { return dimension_.load(); }
  EmbeddingVector embed(std::string_view text) override;
  std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) override;

 private:
  JsonPoster poster_;
  std::string provider_id_;
  std::atomic<std::size_t> dimension_{0};
};

// {"kind": "hashing", "dimension": 256} or
// {"kind": "http", "endpoint": ..., "api_key_env": ..., "timeout_s": ...,
//  "max_in_flight": ..., "provider_id": ...}
std::unique_ptr<Embedder> make_embedder(const nlohmann::json& config);

}  // namespace warnbench
