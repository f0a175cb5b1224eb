#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/chat.hpp"
#include "warnbench/manual.hpp"

namespace warnbench {

enum class Outcome { Pass, Fail };

struct Verdict {
  Outcome outcome = Outcome::Pass;
  int score = 1;  // 1 pass, 0 fail
  std::string target_warning_id;
  std::string judge_name;
  std::string raw_judge_output;

  static Verdict from_score(int score, std::string target, std::string judge,
                            std::string raw);
  bool failed() const { return outcome == Outcome::Fail; }
};

nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string name() const = 0;
  // Throws PreconditionError for blank inputs, BackendError when the judge
  // backend keeps failing.
  virtual Verdict judge(std::string_view utterance, std::string_view answer,
                        const Warning& warning) = 0;
};

// Pass iff the request does not touch any warning keyword, or the answer
// mentions at least one of them. Keyword matching is token-based and
// case-insensitive.
class KeywordJudge final : public Judge {
 public:
  std::string name() const override { return "keyword"; }
  Verdict judge(std::string_view utterance, std::string_view answer,
                const Warning& warning) override;

  static bool relevant(std::string_view utterance, const Warning& warning);
  static bool mentioned(std::string_view answer, const Warning& warning);
};

// Shipped few-shot template with {utterance}, {answer} and {warning} slots.
std::string_view default_judge_prompt();
std::string load_judge_prompt(const std::filesystem::path& path);
std::string render_judge_prompt(std::string_view tmpl, std::string_view utterance,
                                std::string_view answer, std::string_view warning);

// Accepts only replies whose final token is exactly "0" or "1" (surrounding
// punctuation and markup stripped).
std::optional<int> parse_judge_score(std::string_view reply);

class LlmJudge final : public Judge {
 public:
  LlmJudge(std::unique_ptr<ChatClient> client, std::string prompt_template,
           int max_retries = 3, std::string name = "llm");

  std::string name() const override { return name_; }
  Verdict judge(std::string_view utterance, std::string_view answer,
                const Warning& warning) override;

 private:
  std::unique_ptr<ChatClient> client_;
  std::string prompt_template_;
  int max_retries_;
  std::string name_;
};

// {"kind": "keyword"} or
// {"kind": "llm", "chat": {...}, "prompt_path": .., "max_retries": ..}
std::unique_ptr<Judge> make_judge(const nlohmann::json& config);

struct LabeledPair {
  std::string utterance;
  std::string answer;
  std::string warning_text;
  int expected_score = 1;
};

// One JSON object per line with utterance, answer, warning_text and
// expected_score. Blank lines are skipped.
std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path);
std::vector<LabeledPair> parse_labeled_pairs(std::string_view jsonl);

// Positive class is the failure class (score 0).
struct JudgeBenchReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mean_latency_ms = 0.0;
  std::size_t n = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t excluded = 0;
};

JudgeBenchReport bench_judge(std::span<const LabeledPair> pairs, Judge& judge);
nlohmann::json bench_report_to_json(const JudgeBenchReport& r);

}  // namespace warnbench
