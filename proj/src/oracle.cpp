#include "warnbench/oracle.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "judge_prompt.hpp"
#include "warnbench/error.hpp"
#include "warnbench/text.hpp"

namespace warnbench {

Verdict Verdict::from_score(int score, std::string target, std::string judge,
                            std::string raw) {
  if (score != 0 && score != 1) {
    throw PreconditionError("verdict score must be 0 or 1");
  }
  return {score == 1 ? Outcome::Pass : Outcome::Fail, score, std::move(target),
          std::move(judge), std::move(raw)};
}

nlohmann::json verdict_to_json(const Verdict& v) {
  return {{"outcome", v.outcome == Outcome::Pass ? "pass" : "fail"},
          {"score", v.score},
          {"target_warning_id", v.target_warning_id},
          {"judge_name", v.judge_name},
          {"raw_judge_output", v.raw_judge_output}};
}

Verdict verdict_from_json(const nlohmann::json& j) {
  auto v = Verdict::from_score(j.at("score").get<int>(),
                               j.at("target_warning_id").get<std::string>(),
                               j.at("judge_name").get<std::string>(),
                               j.value("raw_judge_output", std::string{}));
  const auto outcome = j.at("outcome").get<std::string>();
  if ((outcome == "pass") != (v.score == 1)) {
    throw ParseError("verdict outcome \"" + outcome + "\" contradicts score");
  }
  return v;
}

namespace {

void require_nonblank(std::string_view s, const char* what) {
  if (text::trim(s).empty()) {
    throw PreconditionError(std::string(what) + " must not be empty");
  }
}

}  // namespace

bool KeywordJudge::relevant(std::string_view utterance, const Warning& warning) {
  const auto toks = text::tokenize(utterance);
  for (const auto& k : warning.keywords) {
    if (text::contains_phrase(toks, k)) return true;
  }
  return false;
}

bool KeywordJudge::mentioned(std::string_view answer, const Warning& warning) {
  const auto toks = text::tokenize(answer);
  for (const auto& k : warning.keywords) {
    if (text::contains_phrase(toks, k)) return true;
  }
  return false;
}

Verdict KeywordJudge::judge(std::string_view utterance, std::string_view answer,
                            const Warning& warning) {
  require_nonblank(utterance, "utterance");
  require_nonblank(answer, "answer");
  require_nonblank(warning.text, "warning text");

  const bool rel = relevant(utterance, warning);
  const bool men = rel && mentioned(answer, warning);
  const int score = (!rel || men) ? 1 : 0;
  std::string raw = std::string("relevant=") + (rel ? "1" : "0") +
                    " mentioned=" + (men ? "1" : "0") + " score=" +
                    std::to_string(score);
  return Verdict::from_score(score, warning.id, name(), std::move(raw));
}

std::string_view default_judge_prompt() { return assets::kJudgePrompt; }

std::string load_judge_prompt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open judge prompt " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render_judge_prompt(std::string_view tmpl, std::string_view utterance,
                                std::string_view answer, std::string_view warning) {
  // Leading '#' lines are template metadata.
  std::string_view body = tmpl;
  while (!body.empty() && body.front() == '#') {
    auto nl = body.find('\n');
    body = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
  }
  std::string out;
  out.reserve(body.size() + utterance.size() + answer.size() + warning.size());
  for (std::size_t i = 0; i < body.size();) {
    auto try_slot = [&](std::string_view slot, std::string_view value) {
      if (body.substr(i, slot.size()) == slot) {
        out += value;
        i += slot.size();
        return true;
      }
      return false;
    };
    if (try_slot("{utterance}", utterance) || try_slot("{answer}", answer) ||
        try_slot("{warning}", warning)) {
      continue;
    }
    out.push_back(body[i++]);
  }
  return out;
}

std::optional<int> parse_judge_score(std::string_view reply) {
  auto parts = text::split_whitespace(reply);
  if (parts.empty()) return std::nullopt;
  std::string_view last = parts.back();
  auto is_wrapper = [](char c) {
    return c == '.' || c == '*' || c == '"' || c == '\'' || c == '`' ||
           c == ')' || c == '(' || c == '[' || c == ']' || c == ':';
  };
  while (!last.empty() && is_wrapper(last.front())) last.remove_prefix(1);
  while (!last.empty() && is_wrapper(last.back())) last.remove_suffix(1);
  if (last == "0") return 0;
  if (last == "1") return 1;
  return std::nullopt;
}

LlmJudge::LlmJudge(std::unique_ptr<ChatClient> client,
                   std::string prompt_template, int max_retries,
                   std::string name)
    : client_(std::move(client)),
      prompt_template_(std::move(prompt_template)),
      max_retries_(max_retries),
      name_(std::move(name)) {
  if (!client_) throw PreconditionError("llm judge needs a chat client");
  if (max_retries_ < 0) throw PreconditionError("max_retries must be >= 0");
}

Verdict LlmJudge::judge(std::string_view utterance, std::string_view answer,
                        const Warning& warning) {
  require_nonblank(utterance, "utterance");
  require_nonblank(answer, "answer");
  require_nonblank(warning.text, "warning text");

  const auto prompt =
      render_judge_prompt(prompt_template_, utterance, answer, warning.text);
  std::string last_problem;
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    std::string reply;
    try {
      reply = client_->complete({{"user", prompt}});
    } catch (const BackendError& e) {
      if (!e.retryable()) throw;
      last_problem = e.what();
      spdlog::warn("judge backend error (attempt {}): {}", attempt + 1, last_problem);
      continue;
    }
    if (auto score = parse_judge_score(reply)) {
      return Verdict::from_score(*score, warning.id, name_, reply);
    }
    last_problem = "unparseable judge reply: " + reply.substr(0, 120);
    spdlog::warn("{} (attempt {})", last_problem, attempt + 1);
  }
  throw BackendError("judge failed after " + std::to_string(max_retries_ + 1) +
                         " attempts: " + last_problem,
                     false);
}

std::unique_ptr<Judge> make_judge(const nlohmann::json& config) {
  const auto kind = config.value("kind", std::string("keyword"));
  if (kind == "keyword") return std::make_unique<KeywordJudge>();
  if (kind == "llm") {
    std::string tmpl = config.contains("prompt_path")
                           ? load_judge_prompt(config.at("prompt_path").get<std::string>())
                           : std::string(default_judge_prompt());
    auto chat = chat_config_from_json(config.at("chat"));
    auto name = config.value("name", "llm:" + chat.model);
    return std::make_unique<LlmJudge>(
        std::make_unique<HttpChatClient>(std::move(chat)), std::move(tmpl),
        config.value("max_retries", 3), std::move(name));
  }
  throw PreconditionError("unknown oracle kind \"" + kind + "\"");
}

std::vector<LabeledPair> parse_labeled_pairs(std::string_view jsonl) {
  std::vector<LabeledPair> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    LabeledPair p;
    try {
      p.utterance = j.at("utterance").get<std::string>();
      p.answer = j.at("answer").get<std::string>();
      p.warning_text = j.at("warning_text").get<std::string>();
      p.expected_score = j.at("expected_score").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (p.expected_score != 0 && p.expected_score != 1) {
      throw ValidationError(where + ".expected_score: must be 0 or 1");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_labeled_pairs(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

JudgeBenchReport bench_judge(std::span<const LabeledPair> pairs, Judge& judge) {
  if (pairs.empty()) throw PreconditionError("judge benchmark needs at least one pair");
  JudgeBenchReport r;
  r.n = pairs.size();
  double latency_sum = 0.0;
  std::size_t timed = 0;

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    Warning w{"bench-" + std::to_string(i), p.warning_text,
              text::content_tokens(p.warning_text)};
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = judge.judge(p.utterance, p.answer, w);
    } catch (const Error& e) {
      spdlog::warn("judge failed on pair {}: {}", i, e.what());
      ++r.excluded;
      continue;
    }
    latency_sum += std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    ++timed;

    const bool predicted_fail = v.score == 0;
    const bool expected_fail = p.expected_score == 0;
    if (predicted_fail && expected_fail) ++r.tp;
    else if (predicted_fail) ++r.fp;
    else if (expected_fail) ++r.fn;
    else ++r.tn;
  }

  const double judged = static_cast<double>(r.tp + r.fp + r.fn + r.tn);
  if (judged > 0) {
    r.accuracy = static_cast<double>(r.tp + r.tn) / judged;
  }
  if (r.tp + r.fp > 0) {
    r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  }
  if (r.tp + r.fn > 0) {
    r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  }
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  if (timed > 0) r.mean_latency_ms = latency_sum / static_cast<double>(timed);
  return r;
}

nlohmann::json bench_report_to_json(const JudgeBenchReport& r) {
  return {{"accuracy", r.accuracy},   {"precision", r.precision},
          {"recall", r.recall},       {"f1", r.f1},
          {"mean_latency_ms", r.mean_latency_ms},
          {"n", r.n},                 {"tp", r.tp},
          {"fp", r.fp},               {"fn", r.fn},
          {"tn", r.tn},               {"excluded", r.excluded}};
}

}  // namespace warnbench
