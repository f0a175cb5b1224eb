#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace warnbench::text {

// Whitespace-delimited pieces of `s`, untouched.
std::vector<std::string> split_whitespace(std::string_view s);

std::size_t word_count(std::string_view s);

// Lowercases ASCII and strips every character that is not a letter, digit
// or inner apostrophe. May return an empty string for bare punctuation.
std::string normalize_token(std::string_view raw);

// Normalized tokens of `s`; tokens that normalize to empty are dropped.
std::vector<std::string> tokenize(std::string_view s);

std::set<std::string> token_set(std::string_view s);

bool is_numeric(std::string_view token);

bool is_stopword(std::string_view token);

// Tokens of `s` that carry content: not stopwords, not numeric, length >= 3.
// Order of first occurrence, deduplicated.
std::vector<std::string> content_tokens(std::string_view s);

// True when the normalized token sequence of `phrase` occurs contiguously in
// `haystack_tokens`.
bool contains_phrase(std::span<const std::string> haystack_tokens,
                     std::string_view phrase);

// |a ∩ b| / |a ∪ b|. Throws PreconditionError when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string join(std::span<const std::string> parts, std::string_view sep);

// Stable 64-bit FNV-1a; used wherever a hash ends up in an artifact.
std::uint64_t fnv1a64(std::string_view s,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

// Maps a 64-bit value onto [0, 1) with 53 bits of precision.
double unit_interval(std::uint64_t x);

}  // namespace warnbench::text

namespace warnbench {

// Seeded RNG whose derived draws are identical on every platform.
// std::mt19937_64 is fully specified by the standard, the distribution
// helpers here replace the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return text::unit_interval(engine_()); }
  // Uniform in [0, n); n must be > 0.
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  const T& pick(std::span<const T> items) {
    return items[index(items.size())];
  }
  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[index(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent seed from a base seed and a list of labels.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                          std::uint64_t index = 0);

}  // namespace warnbench
