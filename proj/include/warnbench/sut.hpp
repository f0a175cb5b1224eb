#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/chat.hpp"
#include "warnbench/manual.hpp"

namespace warnbench {

struct SutAnswer {
  std::string text;
  // Names of the manual sections handed to the answering model.
  std::vector<std::string> retrieved_doc_ids;
  double latency_ms = 0.0;
};

// The only surface generators and the pipeline see of a system under test.
class SystemUnderTest {
 public:
  virtual ~SystemUnderTest() = default;
  virtual std::string label() const = 0;
  // Throws BackendError for unreachable backends.
  virtual SutAnswer answer(std::string_view utterance) = 0;
};

// Top `top_k` sections by Jaccard overlap of content tokens between the
// utterance and "name description", ties in document order.
std::vector<const ComponentSection*> retrieve(std::string_view utterance,
                                              const Manual& manual,
                                              std::size_t top_k);

struct SimulatedSutConfig {
  double omission_rate = 0.0;
  std::uint64_t rng_seed = 0;
  std::size_t top_k = 3;
};

// Deterministic omission draw for one (utterance, warning) pair.
bool omission_draw(const SimulatedSutConfig& config, std::string_view utterance,
                   std::string_view warning_id);

// Description of the top section followed by every warning of every
// retrieved section that survives its omission draw.
SutAnswer compose_answer(std::span<const ComponentSection* const> sections,
                         std::string_view utterance,
                         const SimulatedSutConfig& config);

// Failure-injectable retrieval assistant with no mutable state.
class SimulatedSut final : public SystemUnderTest {
 public:
  SimulatedSut(const Manual& manual, SimulatedSutConfig config);

  std::string label() const override;
  SutAnswer answer(std::string_view utterance) override;

  const SimulatedSutConfig& config() const { return config_; }

 private:
  const Manual& manual_;
  SimulatedSutConfig config_;
};

// System prompt built from the retrieved sections for chat-backed SUTs.
std::string build_sut_system_prompt(
    std::span<const ComponentSection* const> sections);

// Retrieval runs harness-side; the chat backend answers from the injected
// sections.
class HttpSut final : public SystemUnderTest {
 public:
  HttpSut(const Manual& manual, std::unique_ptr<ChatClient> client,
          std::size_t top_k, std::string label);

  std::string label() const override { return label_; }
  SutAnswer answer(std::string_view utterance) override;

 private:
  const Manual& manual_;
  std::unique_ptr<ChatClient> client_;
  std::size_t top_k_;
  std::string label_;
};

// {"kind": "simulated", "omission_rate": .., "seed": .., "top_k": ..} or
// {"kind": "http", "chat": {...}, "top_k": .., "label": ..}
std::unique_ptr<SystemUnderTest> make_sut(const nlohmann::json& config,
                                          const Manual& manual);

}  // namespace warnbench
