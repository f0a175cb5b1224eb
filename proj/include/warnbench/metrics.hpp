#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "warnbench/clustering.hpp"
#include "warnbench/embedding.hpp"
#include "warnbench/generators.hpp"
#include "warnbench/oracle.hpp"
#include "warnbench/sut.hpp"

namespace warnbench {

struct ExecutionRecord {
  TestInput input;
  SutAnswer answer;
  Verdict verdict;
};

// Executed and judged records of one run plus the count of every generate
// call (including rejected and errored ones).
struct RunLog {
  std::string run_id;
  std::string generator_name;
  std::string sut_label;
  std::string manual_id;
  std::size_t total_warnings = 0;
  std::vector<ExecutionRecord> records;
  std::size_t generated_count = 0;
  nlohmann::json config;
};

enum class RateDenominator { Generated, Executed };

RateDenominator rate_denominator_from_string(std::string_view s);
std::string to_string(RateDenominator d);

// Distinct target warnings over failing records.
std::size_t warnings_ignored(const RunLog& log);
std::size_t failure_count(const RunLog& log);

// Throws UndefinedError when the denominator is zero.
double failure_rate(const RunLog& log,
                    RateDenominator denominator = RateDenominator::Generated);

// Throws PreconditionError for inputs outside [0, 1].
double overall_score(double w_prime, double rate, double cov);

inline constexpr std::size_t kCoverageRepeats = 10;

struct CoverageResult {
  bool defined = false;
  double cov = 0.0;
  std::vector<double> per_repeat;
  std::vector<std::size_t> k_per_repeat;
  std::string note;
};

// Clusters `failure_space` (k by silhouette, reselected per repeat with seed
// + repeat index), assigns every target point to its nearest centroid and
// reports covered clusters / k. Undefined for fewer than three failures.
CoverageResult coverage_from_points(std::span<const Point> failure_space,
                                    std::span<const Point> target,
                                    std::uint64_t seed,
                                    std::size_t repeats = kCoverageRepeats);

// Failure space = failing utterances of every log; target = failing
// utterances of logs produced by `target_generator`.
CoverageResult failure_coverage(std::span<const RunLog> logs,
                                std::string_view target_generator,
                                Embedder& embedder, std::uint64_t seed,
                                std::size_t repeats = kCoverageRepeats);

struct RunMetrics {
  std::string run_id;
  std::string generator;
  std::string sut;
  std::string manual_id;
  std::size_t W = 0;
  double W_prime = 0.0;
  double rate = 0.0;
  CoverageResult coverage;
  double S = 0.0;
  std::size_t failures = 0;
  std::size_t generated = 0;
  std::size_t executed = 0;
};

// Means over the runs of one generator x SUT x manual cell.
struct GeneratorMetrics {
  std::string generator;
  std::string sut;
  std::string manual_id;
  std::size_t runs = 0;
  double W = 0.0;
  double W_prime = 0.0;
  double rate = 0.0;
  double cov = 0.0;
  bool cov_defined = false;
  std::vector<double> cov_per_repeat;
  double S = 0.0;
  double failures = 0.0;
};

struct MetricsReport {
  std::vector<GeneratorMetrics> rows;  // sorted by generator, then sut
  std::vector<RunMetrics> runs;        // sorted by generator, sut, run id
};

// Coverage for each log is computed against the failures of every log that
// shares its SUT label.
MetricsReport compute_metrics(std::span<const RunLog> logs, Embedder& embedder,
                              std::uint64_t seed,
                              RateDenominator denominator = RateDenominator::Generated);

nlohmann::json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

// Formats: "table" (CSV), "records" (JSON lines), "json", "coverage"
// (per-repeat CSV), "text". Throws PreconditionError otherwise.
std::string render_report(const MetricsReport& report, std::string_view format);

}  // namespace warnbench
