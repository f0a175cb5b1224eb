#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/embedding.hpp"
#include "warnbench/generators.hpp"
#include "warnbench/manual.hpp"
#include "warnbench/metrics.hpp"
#include "warnbench/oracle.hpp"
#include "warnbench/sut.hpp"
#include "warnbench/validation.hpp"

namespace warnbench {

inline constexpr double kDefaultBudgetSeconds = 2.0 * 60.0 * 60.0;

struct Budget {
  std::optional<double> seconds = kDefaultBudgetSeconds;
  std::optional<std::size_t> max_generations;
};

struct RunConfig {
  // Relative paths are resolved against base_dir.
  std::filesystem::path base_dir;
  std::string manual;
  std::string dictionary;
  std::string generator;
  nlohmann::json generator_settings = nlohmann::json::object();
  nlohmann::json sut = {{"kind", "simulated"}};
  nlohmann::json oracle = {{"kind", "keyword"}};
  nlohmann::json embedder = {{"kind", "hashing"}};
  // Chat backend for LLM-drafting generators; null when offline.
  nlohmann::json llm;
  Budget budget;
  std::uint64_t seed = 0;
  double dedup_threshold = kDefaultDedupThreshold;
  RateDenominator rate_denominator = RateDenominator::Generated;
  std::size_t max_consecutive_errors = 5;
  std::string output_dir = "runs";
  // Optional matrix for bench: {"generators": [...], "suts": [...],
  // "manuals": [...], "repeats": 6}.
  nlohmann::json bench;

  std::filesystem::path resolve(const std::string& p) const;
};

// Throws ParseError / ValidationError naming the offending field.
RunConfig parse_run_config(const nlohmann::json& j,
                           const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);
// Normalized snapshot with defaults filled; paths kept as written.
nlohmann::json run_config_to_json(const RunConfig& c);

enum class Disposition { Executed, Rejected, Errored };
std::string to_string(Disposition d);

// One line of records.jsonl: exactly one per generate call.
struct GenerationRecord {
  std::size_t seq = 0;
  Disposition disposition = Disposition::Executed;
  TestInput input;
  std::vector<RejectReason> reasons;
  std::optional<SutAnswer> answer;
  std::optional<Verdict> verdict;
  std::string error_stage;
  std::string error_message;
};

nlohmann::json generation_record_to_json(const GenerationRecord& r);
GenerationRecord generation_record_from_json(const nlohmann::json& j);

struct RunArtifact {
  std::string run_id;
  std::filesystem::path dir;
  std::string status;  // "completed" or "failed"
  std::string error;
  RunLog log;
  std::size_t rejected = 0;
  std::size_t errored = 0;
  double wall_seconds = 0.0;
};

// Components for one run. The pipeline drives them strictly sequentially.
struct RunComponents {
  const Manual& manual;
  TestGenerator& generator;
  SystemUnderTest& sut;
  Judge& judge;
  Embedder& embedder;
  const Dictionary& dictionary;
};

// Runs until the budget is exhausted, writing <output_dir>/<run_id>/ as it
// goes. The time budget is checked before each generate call; an in-flight
// test always completes.
RunArtifact run(const RunConfig& config);
RunArtifact run(const RunConfig& config, RunComponents components);

std::string make_run_id(const RunConfig& config, std::string_view manual_id);

// Reads config.json and records.jsonl of an artifact directory.
RunLog load_run_log(const std::filesystem::path& artifact_dir);
std::vector<GenerationRecord> load_generation_records(
    const std::filesystem::path& artifact_dir);

struct MetricsOptions {
  std::uint64_t seed = 0;
  std::optional<RateDenominator> rate_denominator;
  // Overrides the embedder recorded in the artifacts.
  nlohmann::json embedder;
};

// All artifacts must share a manual id and an embedding provider.
MetricsReport compute_metrics(std::span<const std::filesystem::path> artifact_dirs,
                              const MetricsOptions& options = {});

// Runs the generators x SUTs x manuals x repeats matrix sequentially; repeat
// r uses seed + r.
std::vector<RunArtifact> bench(const RunConfig& config);

JudgeBenchReport run_judge_bench(const RunConfig& config,
                                 const std::filesystem::path& dataset);

}  // namespace warnbench
