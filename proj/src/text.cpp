#include "warnbench/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "warnbench/error.hpp"

namespace warnbench::text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

constexpr std::array<std::string_view, 96> kStopwords = {
    "a",     "about", "above",  "after", "again", "all",   "also",  "am",
    "an",    "and",   "any",    "are",   "as",    "at",    "be",    "been",
    "before", "being", "below", "both",  "but",   "by",    "can",   "could",
    "did",   "do",    "does",   "doing", "down",  "during", "each", "few",
    "for",   "from",  "further", "had",  "has",   "have",  "having", "he",
    "her",   "here",  "him",    "his",   "how",   "i",     "if",    "in",
    "into",  "is",    "it",     "its",   "may",   "me",    "might", "more",
    "most",  "must",  "my",     "no",    "nor",   "not",   "of",    "on",
    "only",  "or",    "other",  "our",   "out",   "over",  "own",   "same",
    "she",   "should", "so",    "some",  "such",  "than",  "that",  "the",
    "their", "them",  "then",   "there", "these", "they",  "this",  "to",
    "too",   "under", "until",  "up",    "very",  "was",   "we",    "when",
};

}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::string normalize_token(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (c == '\'') {
      out.push_back(c);
    } else if (u >= 0x80) {
      // Non-ASCII bytes are kept so that foreign words fail the dictionary
      // check instead of silently vanishing.
      out.push_back(c);
    }
  }
  auto first = out.find_first_not_of('\'');
  if (first == std::string::npos) return {};
  auto last = out.find_last_not_of('\'');
  return out.substr(first, last - first + 1);
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& piece : split_whitespace(s)) {
    auto t = normalize_token(piece);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::set<std::string> token_set(std::string_view s) {
  auto toks = tokenize(s);
  return {toks.begin(), toks.end()};
}

bool is_numeric(std::string_view token) {
  // Digits with optional single '.' or ',' separators between them.
  if (token.empty()) return false;
  bool prev_digit = false;
  for (char c : token) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      prev_digit = true;
    } else if ((c == '.' || c == ',') && prev_digit) {
      prev_digit = false;
    } else {
      return false;
    }
  }
  return prev_digit;
}

bool is_stopword(std::string_view token) {
  return std::find(kStopwords.begin(), kStopwords.end(), token) !=
         kStopwords.end();
}

std::vector<std::string> content_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) {
    if (t.size() < 3 || is_stopword(t) || is_numeric(t)) continue;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

bool contains_phrase(std::span<const std::string> haystack_tokens,
                     std::string_view phrase) {
  auto needle = tokenize(phrase);
  if (needle.empty() || needle.size() > haystack_tokens.size()) return false;
  auto it = std::search(haystack_tokens.begin(), haystack_tokens.end(),
                        needle.begin(), needle.end());
  return it != haystack_tokens.end();
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) {
    throw PreconditionError("jaccard similarity of two empty sets is undefined");
  }
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_interval(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace warnbench::text

namespace warnbench {

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling keeps the draw unbiased and platform independent.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                          std::uint64_t index) {
  return text::splitmix64(base ^ text::fnv1a64(label) ^
                          text::splitmix64(index + 0x5bd1e995ULL));
}

}  // namespace warnbench
