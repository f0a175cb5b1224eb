#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/chat.hpp"
#include "warnbench/manual.hpp"
#include "warnbench/oracle.hpp"
#include "warnbench/text.hpp"
#include "warnbench/validation.hpp"

namespace warnbench {

struct TestInput {
  std::string id;
  std::string utterance;
  std::optional<std::string> target_warning_id;
  std::string generator_name;
  // Logical timestamp: the generate-call sequence number within the run.
  std::uint64_t created_at = 0;
};

nlohmann::json test_input_to_json(const TestInput& t);
TestInput test_input_from_json(const nlohmann::json& j);

struct HistoryEntry {
  TestInput input;
  ValidationVerdict validation;
  // Empty when the input was not executed (rejected or errored).
  std::optional<Verdict> verdict;
};

// Everything a generator may observe. There is deliberately no handle to the
// system under test.
struct GeneratorContext {
  const Manual& manual;
  std::vector<HistoryEntry> history;
  std::uint64_t rng_seed = 0;
};

class TestGenerator {
 public:
  virtual ~TestGenerator() = default;

  virtual std::string name() const = 0;

  // Pure in (ctx, internal state): calling twice without update_state in
  // between returns the same input for the built-in generators.
  virtual TestInput generate(const GeneratorContext& ctx) = 0;

  // Called once per generate call. `verdict` is empty when the input was not
  // executed.
  virtual void update_state(const GeneratorContext& ctx, const TestInput& input,
                            const std::optional<Verdict>& verdict) = 0;
};

// Per-call RNG: a function of the run seed, the generator name and the
// history length.
Rng call_rng(const GeneratorContext& ctx, std::string_view generator_name);

// ---------------------------------------------------------------------------
// Shared strategy pieces

using WarningWeights = std::map<std::string, double>;

// Samples an id with probability weight / sum(weights). Throws
// PreconditionError if no weight is positive or any is negative/non-finite.
std::string select_warning(const WarningWeights& weights, Rng& rng);

inline constexpr std::array<std::string_view, 4> kFillerWords = {"hm", "uhm",
                                                                 "um", "uh"};

enum class PerturbKind { InsertFiller, DeleteWord };

struct Perturbation {
  PerturbKind kind;
  // InsertFiller: word boundary in [0, word_count]. DeleteWord: word index in
  // [1, word_count).
  std::size_t position;
  std::string_view filler;
};

std::string apply_perturbation(std::string_view utterance, const Perturbation& p);

// One random word-level perturbation: a filler insertion, or (for inputs of
// two or more words) deletion of a non-first word.
std::string perturb(std::string_view utterance, Rng& rng);

// Drafts an utterance aimed at `warning` in `section`.
class UtteranceDrafter {
 public:
  virtual ~UtteranceDrafter() = default;
  virtual std::string draft(const ComponentSection& section,
                            std::span<const Warning* const> warnings,
                            Rng& rng) = 0;
};

// "How do I <action> <component> when <condition>?" filled from the section
// name and the warning keywords.
class TemplateDrafter final : public UtteranceDrafter {
 public:
  std::string draft(const ComponentSection& section,
                    std::span<const Warning* const> warnings, Rng& rng) override;
};

// Asks a chat model for one short driver question; first line of the reply.
class LlmDrafter final : public UtteranceDrafter {
 public:
  explicit LlmDrafter(std::shared_ptr<ChatClient> client);
  std::string draft(const ComponentSection& section,
                    std::span<const Warning* const> warnings, Rng& rng) override;

 private:
  std::shared_ptr<ChatClient> client_;
};

std::string component_phrase(const ComponentSection& section);

// Every word the built-in templates can emit besides manual-derived words;
// used to check wordlists.
std::vector<std::string> template_vocabulary();

// ---------------------------------------------------------------------------
// Built-in generators

// Baseline: random set of one or two warnings, drafted by LLM or template.
class RandomGenerator final : public TestGenerator {
 public:
  explicit RandomGenerator(std::shared_ptr<ChatClient> llm = nullptr);

  std::string name() const override { return "random"; }
  TestInput generate(const GeneratorContext& ctx) override;
  void update_state(const GeneratorContext&, const TestInput&,
                    const std::optional<Verdict>&) override {}

 private:
  std::unique_ptr<UtteranceDrafter> drafter_;
};

struct AtlasSettings {
  double decay = 0.5;
  double perturb_probability = 0.7;
};

// Priority-based selection plus human-like perturbation. Unexplored warnings
// have priority 1, each prior selection multiplies priority by `decay`; the
// highest priority wins, ties broken at random.
class AtlasLikeGenerator final : public TestGenerator {
 public:
  explicit AtlasLikeGenerator(AtlasSettings settings = {});

  std::string name() const override { return "atlas-like"; }
  TestInput generate(const GeneratorContext& ctx) override;
  void update_state(const GeneratorContext& ctx, const TestInput& input,
                    const std::optional<Verdict>& verdict) override;

  double priority(std::string_view warning_id) const;
  std::size_t selections(std::string_view warning_id) const;

 private:
  AtlasSettings settings_;
  std::map<std::string, std::size_t, std::less<>> selections_;
  TemplateDrafter drafter_;
};

struct ExidaSettings {
  double diversity_bound = 0.6;
  int max_retries = 5;
};

// Situation -> intent -> question, regenerated while token Jaccard against
// any earlier utterance exceeds the diversity bound.
class ExidaLikeGenerator final : public TestGenerator {
 public:
  explicit ExidaLikeGenerator(ExidaSettings settings = {},
                              std::shared_ptr<ChatClient> llm = nullptr);

  std::string name() const override { return "exida-like"; }
  TestInput generate(const GeneratorContext& ctx) override;
  void update_state(const GeneratorContext&, const TestInput&,
                    const std::optional<Verdict>&) override {}

  // Largest Jaccard similarity between `utterance` and any history entry.
  static double max_similarity(std::string_view utterance,
                               const GeneratorContext& ctx);

 private:
  std::string craft(const ComponentSection& section, const Warning& warning,
                    Rng& rng);

  ExidaSettings settings_;
  std::shared_ptr<ChatClient> llm_;
};

struct WarnlessSettings {
  double smoothing = 0.05;
};

// Probability-based selection where each warning's weight tracks the
// smoothed share of its executed tests that failed:
//   weight = smoothing + (fails + 1) / (trials + 2)
class WarnlessLikeGenerator final : public TestGenerator {
 public:
  explicit WarnlessLikeGenerator(WarnlessSettings settings = {},
                                 std::shared_ptr<ChatClient> llm = nullptr);

  std::string name() const override { return "warnless-like"; }
  TestInput generate(const GeneratorContext& ctx) override;
  void update_state(const GeneratorContext& ctx, const TestInput& input,
                    const std::optional<Verdict>& verdict) override;

  double weight(std::string_view warning_id) const;
  WarningWeights weights(const Manual& manual) const;

 private:
  struct Stats {
    std::size_t trials = 0;
    std::size_t fails = 0;
  };
  WarnlessSettings settings_;
  std::map<std::string, Stats, std::less<>> stats_;
  std::unique_ptr<UtteranceDrafter> drafter_;
};

inline constexpr std::size_t kCrispMaxWords = 12;

// Fixed phrase bank of risk contexts crossed with component names.
class CrispLikeGenerator final : public TestGenerator {
 public:
  std::string name() const override { return "crisp-like"; }
  TestInput generate(const GeneratorContext& ctx) override;
  void update_state(const GeneratorContext&, const TestInput&,
                    const std::optional<Verdict>&) override {}

  static std::span<const std::string_view> risk_contexts();
  // Context sharing the most tokens with the warning text; random on ties.
  static std::string_view navigate(const Warning& warning, Rng& rng);
};

// ---------------------------------------------------------------------------
// Registry

struct GeneratorServices {
  // Optional chat backend for LLM-drafted utterances.
  std::shared_ptr<ChatClient> llm;
};

using GeneratorFactory = std::function<std::unique_ptr<TestGenerator>(
    const nlohmann::json& settings, const GeneratorServices& services)>;

// Registers a generator under `name`; replaces an existing registration.
void register_generator(const std::string& name, GeneratorFactory factory);
bool has_generator(const std::string& name);
std::vector<std::string> registered_generators();

// Throws PreconditionError for unknown names.
std::unique_ptr<TestGenerator> make_generator(const std::string& name,
                                              const nlohmann::json& settings,
                                              const GeneratorServices& services);

}  // namespace warnbench
