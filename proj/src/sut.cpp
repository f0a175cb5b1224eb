#include "warnbench/sut.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include "warnbench/error.hpp"
#include "warnbench/text.hpp"

namespace warnbench {

std::vector<const ComponentSection*> retrieve(std::string_view utterance,
                                              const Manual& manual,
                                              std::size_t top_k) {
  if (top_k == 0) throw PreconditionError("top_k must be at least 1");
  // Stopwords would otherwise dominate the overlap of short queries.
  auto content_set = [](std::string_view t) {
    auto v = text::content_tokens(t);
    return std::set<std::string>(v.begin(), v.end());
  };
  const auto query = content_set(utterance);

  struct Scored {
    double score;
    const ComponentSection* section;
  };
  std::vector<Scored> scored;
  scored.reserve(manual.sections.size());
  for (const auto& s : manual.sections) {
    auto doc = content_set(s.name + " " + s.description);
    double score = (query.empty() || doc.empty()) ? 0.0 : text::jaccard(query, doc);
    scored.push_back({score, &s});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });

  std::vector<const ComponentSection*> out;
  for (std::size_t i = 0; i < scored.size() && i < top_k; ++i) {
    out.push_back(scored[i].section);
  }
  return out;
}

bool omission_draw(const SimulatedSutConfig& config, std::string_view utterance,
                   std::string_view warning_id) {
  std::uint64_t key = config.rng_seed ^ text::fnv1a64(utterance);
  key = text::splitmix64(key) ^ text::fnv1a64(warning_id);
  return text::unit_interval(text::splitmix64(key)) < config.omission_rate;
}

SutAnswer compose_answer(std::span<const ComponentSection* const> sections,
                         std::string_view utterance,
                         const SimulatedSutConfig& config) {
  SutAnswer a;
  std::vector<std::string> parts;
  if (!sections.empty() && !text::trim(sections.front()->description).empty()) {
    parts.push_back(text::trim(sections.front()->description));
  }
  for (const auto* s : sections) {
    a.retrieved_doc_ids.push_back(s->name);
    for (const auto& w : s->warnings) {
      if (!omission_draw(config, utterance, w.id)) parts.push_back(w.text);
    }
  }
  a.text = parts.empty() ? std::string("I could not find anything about that in the manual.")
                         : text::join(parts, " ");
  return a;
}

SimulatedSut::SimulatedSut(const Manual& manual, SimulatedSutConfig config)
    : manual_(manual), config_(config) {
  if (!(config_.omission_rate >= 0.0 && config_.omission_rate <= 1.0)) {
    throw PreconditionError("omission_rate must lie in [0, 1]");
  }
  if (config_.top_k == 0) throw PreconditionError("top_k must be at least 1");
}

std::string SimulatedSut::label() const {
  std::ostringstream ss;
  ss << "simulated(omission=" << config_.omission_rate << ")";
  return ss.str();
}

SutAnswer SimulatedSut::answer(std::string_view utterance) {
  auto sections = retrieve(utterance, manual_, config_.top_k);
  return compose_answer(sections, utterance, config_);
}

std::string build_sut_system_prompt(
    std::span<const ComponentSection* const> sections) {
  std::string prompt =
      "You are an in-car assistant that answers questions about the vehicle "
      "using only the owner's manual excerpts below. Answer briefly.\n";
  for (const auto* s : sections) {
    prompt += "\n## " + s->name + "\n" + s->description + "\n";
    for (const auto& w : s->warnings) prompt += "WARNING: " + w.text + "\n";
  }
  return prompt;
}

HttpSut::HttpSut(const Manual& manual, std::unique_ptr<ChatClient> client,
                 std::size_t top_k, std::string label)
    : manual_(manual),
      client_(std::move(client)),
      top_k_(top_k),
      label_(std::move(label)) {
  if (top_k_ == 0) throw PreconditionError("top_k must be at least 1");
}

SutAnswer HttpSut::answer(std::string_view utterance) {
  auto sections = retrieve(utterance, manual_, top_k_);
  SutAnswer a;
  for (const auto* s : sections) a.retrieved_doc_ids.push_back(s->name);

  const auto start = std::chrono::steady_clock::now();
  a.text = client_->complete({{"system", build_sut_system_prompt(sections)},
                              {"user", std::string(utterance)}});
  a.latency_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  if (text::trim(a.text).empty()) {
    throw BackendError("system under test returned an empty answer", true);
  }
  return a;
}

std::unique_ptr<SystemUnderTest> make_sut(const nlohmann::json& config,
                                          const Manual& manual) {
  const auto kind = config.value("kind", std::string("simulated"));
  if (kind == "simulated") {
    SimulatedSutConfig c;
    c.omission_rate = config.value("omission_rate", 0.0);
    c.rng_seed = config.value("seed", std::uint64_t{0});
    c.top_k = config.value("top_k", std::size_t{3});
    return std::make_unique<SimulatedSut>(manual, c);
  }
  if (kind == "http") {
    auto chat = chat_config_from_json(config.at("chat"));
    auto label = config.value("label", "http:" + chat.model);
    return std::make_unique<HttpSut>(
        manual, std::make_unique<HttpChatClient>(std::move(chat)),
        config.value("top_k", std::size_t{3}), std::move(label));
  }
  throw PreconditionError("unknown sut kind \"" + kind + "\"");
}

}  // namespace warnbench
