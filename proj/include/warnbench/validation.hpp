#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/embedding.hpp"

namespace warnbench {

inline constexpr std::size_t kMaxWords = 25;
inline constexpr double kDefaultDedupThreshold = 0.95;

// True iff the utterance has fewer than kMaxWords whitespace-delimited words.
bool check_length(std::string_view utterance);

// Case-insensitive English wordlist, one word per line.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(const std::vector<std::string>& words);

  static Dictionary load(const std::filesystem::path& path);

  bool contains(std::string_view normalized_token) const;
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

// Normalized tokens absent from the dictionary, in order. Numeric tokens
// and tokens that are empty after stripping punctuation are exempt.
std::vector<std::string> check_english(std::string_view utterance,
                                       const Dictionary& dictionary);

struct DuplicateHit {
  std::string input_id;
  double similarity = 0.0;
};

class DedupIndex {
 public:
  // Values above 1 disable deduplication; 0 rejects anything with positive
  // similarity. Comparison is strict: similarity == threshold is admitted.
  explicit DedupIndex(double threshold = kDefaultDedupThreshold);

  double threshold() const { return threshold_; }
  std::size_t size() const { return entries_.size(); }

  // First entry whose similarity exceeds the threshold.
  std::optional<DuplicateHit> find(const EmbeddingVector& v) const;
  void add(std::string input_id, EmbeddingVector v);

 private:
  struct Entry {
    std::string input_id;
    EmbeddingVector vector;
  };
  double threshold_;
  std::vector<Entry> entries_;
};

std::optional<DuplicateHit> check_duplicate(std::string_view utterance,
                                            const DedupIndex& index,
                                            Embedder& embedder);

struct RejectReason {
  enum class Kind { TooLong, NonEnglishWord, Duplicate };
  Kind kind;
  std::string token;         // NonEnglishWord
  std::string similar_id;    // Duplicate
  double similarity = 0.0;   // Duplicate

  static RejectReason too_long() { return {Kind::TooLong, {}, {}, 0.0}; }
  static RejectReason non_english(std::string t) {
    return {Kind::NonEnglishWord, std::move(t), {}, 0.0};
  }
  static RejectReason duplicate(std::string id, double s) {
    return {Kind::Duplicate, {}, std::move(id), s};
  }

  bool operator==(const RejectReason&) const = default;
};

std::string to_string(RejectReason::Kind kind);
nlohmann::json reason_to_json(const RejectReason& r);
RejectReason reason_from_json(const nlohmann::json& j);

struct ValidationVerdict {
  bool valid = true;
  std::vector<RejectReason> reasons;
};

// Runs every check and collects all reasons; does not touch the index.
ValidationVerdict validate(std::string_view utterance, const DedupIndex& index,
                           const Dictionary& dictionary, Embedder& embedder);

// Owns a dedup index and makes check-then-register atomic.
class Validator {
 public:
  Validator(Dictionary dictionary, Embedder& embedder,
            double threshold = kDefaultDedupThreshold);

  // Validates and, when valid, registers `input_id` in the index.
  ValidationVerdict admit(const std::string& input_id,
                          std::string_view utterance);

  // Validates without registering.
  ValidationVerdict check(std::string_view utterance);

  std::size_t admitted() const;
  const Dictionary& dictionary() const { return dictionary_; }

 private:
  ValidationVerdict run(std::string_view utterance,
                        std::optional<EmbeddingVector>& embedding) const;

  Dictionary dictionary_;
  Embedder& embedder_;
  DedupIndex index_;
  mutable std::mutex mu_;
};

}  // namespace warnbench
