#include "warnbench/validation.hpp"

#include <cmath>
#include <fstream>

#include "warnbench/error.hpp"
#include "warnbench/text.hpp"

namespace warnbench {

bool check_length(std::string_view utterance) {
  return text::word_count(utterance) < kMaxWords;
}

Dictionary::Dictionary(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    auto t = text::normalize_token(w);
    if (!t.empty()) words_.insert(std::move(t));
  }
}

Dictionary Dictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open wordlist " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = text::trim(line);
    if (!w.empty() && w[0] != '#') words.push_back(std::move(w));
  }
  Dictionary d(words);
  if (d.empty()) throw ValidationError("wordlist " + path.string() + " is empty");
  return d;
}

bool Dictionary::contains(std::string_view normalized_token) const {
  return words_.contains(std::string(normalized_token));
}

std::vector<std::string> check_english(std::string_view utterance,
                                       const Dictionary& dictionary) {
  if (dictionary.empty()) {
    throw PreconditionError("dictionary must not be empty");
  }
  std::vector<std::string> offending;
  for (const auto& tok : text::tokenize(utterance)) {
    if (text::is_numeric(tok)) continue;
    if (!dictionary.contains(tok)) offending.push_back(tok);
  }
  return offending;
}

DedupIndex::DedupIndex(double threshold) : threshold_(threshold) {
  if (!std::isfinite(threshold_) || threshold_ < 0.0) {
    throw PreconditionError("dedup threshold must be finite and >= 0");
  }
}

std::optional<DuplicateHit> DedupIndex::find(const EmbeddingVector& v) const {
  for (const auto& e : entries_) {
    double s = cosine_similarity(v, e.vector);
    if (s > threshold_) return DuplicateHit{e.input_id, s};
  }
  return std::nullopt;
}

void DedupIndex::add(std::string input_id, EmbeddingVector v) {
  entries_.push_back({std::move(input_id), std::move(v)});
}

std::optional<DuplicateHit> check_duplicate(std::string_view utterance,
                                            const DedupIndex& index,
                                            Embedder& embedder) {
  if (index.size() == 0) return std::nullopt;
  return index.find(embedder.embed(utterance));
}

std::string to_string(RejectReason::Kind kind) {
  switch (kind) {
    case RejectReason::Kind::TooLong:
      return "too_long";
    case RejectReason::Kind::NonEnglishWord:
      return "non_english_word";
    case RejectReason::Kind::Duplicate:
      return "duplicate";
  }
  return "unknown";
}

nlohmann::json reason_to_json(const RejectReason& r) {
  nlohmann::json j{{"kind", to_string(r.kind)}};
  if (r.kind == RejectReason::Kind::NonEnglishWord) j["token"] = r.token;
  if (r.kind == RejectReason::Kind::Duplicate) {
    j["similar_id"] = r.similar_id;
    j["similarity"] = r.similarity;
  }
  return j;
}

RejectReason reason_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "too_long") return RejectReason::too_long();
  if (kind == "non_english_word") {
    return RejectReason::non_english(j.at("token").get<std::string>());
  }
  if (kind == "duplicate") {
    return RejectReason::duplicate(j.at("similar_id").get<std::string>(),
                                   j.at("similarity").get<double>());
  }
  throw ParseError("unknown rejection reason \"" + kind + "\"");
}

namespace {

ValidationVerdict validate_with(std::string_view utterance,
                                const DedupIndex& index,
                                const Dictionary& dictionary,
                                Embedder& embedder,
                                std::optional<EmbeddingVector>& embedding) {
  ValidationVerdict v;
  if (!check_length(utterance)) v.reasons.push_back(RejectReason::too_long());
  for (auto& tok : check_english(utterance, dictionary)) {
    v.reasons.push_back(RejectReason::non_english(std::move(tok)));
  }
  embedding = embedder.embed(utterance);
  if (auto hit = index.find(*embedding)) {
    v.reasons.push_back(
        RejectReason::duplicate(std::move(hit->input_id), hit->similarity));
  }
  v.valid = v.reasons.empty();
  return v;
}

}  // namespace

ValidationVerdict validate(std::string_view utterance, const DedupIndex& index,
                           const Dictionary& dictionary, Embedder& embedder) {
  std::optional<EmbeddingVector> unused;
  return validate_with(utterance, index, dictionary, embedder, unused);
}

Validator::Validator(Dictionary dictionary, Embedder& embedder,
                     double threshold)
    : dictionary_(std::move(dictionary)),
      embedder_(embedder),
      index_(threshold) {
  if (dictionary_.empty()) {
    throw PreconditionError("dictionary must not be empty");
  }
}

ValidationVerdict Validator::run(std::string_view utterance,
                                 std::optional<EmbeddingVector>& embedding) const {
  return validate_with(utterance, index_, dictionary_, embedder_, embedding);
}

ValidationVerdict Validator::admit(const std::string& input_id,
                                   std::string_view utterance) {
  std::lock_guard lock(mu_);
  std::optional<EmbeddingVector> embedding;
  auto verdict = run(utterance, embedding);
  if (verdict.valid) index_.add(input_id, std::move(*embedding));
  return verdict;
}

ValidationVerdict Validator::check(std::string_view utterance) {
  std::lock_guard lock(mu_);
  std::optional<EmbeddingVector> embedding;
  return run(utterance, embedding);
}

std::size_t Validator::admitted() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

}  // namespace warnbench
