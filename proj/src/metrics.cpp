#include "warnbench/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "warnbench/error.hpp"

namespace warnbench {

RateDenominator rate_denominator_from_string(std::string_view s) {
  if (s == "generated") return RateDenominator::Generated;
  if (s == "executed") return RateDenominator::Executed;
  throw PreconditionError("rate_denominator must be \"generated\" or \"executed\"");
}

std::string to_string(RateDenominator d) {
  return d == RateDenominator::Generated ? "generated" : "executed";
}

std::size_t warnings_ignored(const RunLog& log) {
  std::set<std::string> ids;
  for (const auto& r : log.records) {
    if (r.verdict.failed()) ids.insert(r.verdict.target_warning_id);
  }
  return ids.size();
}

std::size_t failure_count(const RunLog& log) {
  return static_cast<std::size_t>(
      std::count_if(log.records.begin(), log.records.end(),
                    [](const ExecutionRecord& r) { return r.verdict.failed(); }));
}

double failure_rate(const RunLog& log, RateDenominator denominator) {
  const std::size_t denom = denominator == RateDenominator::Generated
                                ? log.generated_count
                                : log.records.size();
  if (denom == 0) {
    throw UndefinedError("failure rate is undefined for a run without " +
                         std::string(denominator == RateDenominator::Generated
                                         ? "generated"
                                         : "executed") +
                         " inputs");
  }
  return static_cast<double>(failure_count(log)) / static_cast<double>(denom);
}

double overall_score(double w_prime, double rate, double cov) {
  for (double x : {w_prime, rate, cov}) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw PreconditionError("score components must lie in [0, 1]");
    }
  }
  return (w_prime + rate + cov) / 3.0;
}

CoverageResult coverage_from_points(std::span<const Point> failure_space,
                                    std::span<const Point> target,
                                    std::uint64_t seed, std::size_t repeats) {
  CoverageResult out;
  if (repeats == 0) throw PreconditionError("coverage needs at least one repeat");
  if (failure_space.size() < 3) {
    out.note = "undefined: fewer than three failures in the aggregated space";
    return out;
  }
  out.defined = true;

  const std::size_t distinct = count_distinct(failure_space);
  if (distinct < 2) {
    out.note = "degenerate: all failures coincide, treated as one cluster";
    for (std::size_t r = 0; r < repeats; ++r) {
      out.per_repeat.push_back(target.empty() ? 0.0 : 1.0);
      out.k_per_repeat.push_back(1);
    }
  } else {
    DistanceMatrix dm(failure_space);
    const std::size_t k_max =
        std::min(kDefaultMaxClusters, failure_space.size() - 1);
    for (std::size_t r = 0; r < repeats; ++r) {
      auto sel = silhouette_select_k(failure_space, seed + r, dm, 2, k_max);
      const auto& c = sel.clustering;
      std::set<std::size_t> covered;
      for (const auto& p : target) covered.insert(nearest_centroid(p, c.centroids));
      out.per_repeat.push_back(static_cast<double>(covered.size()) /
                               static_cast<double>(c.k));
      out.k_per_repeat.push_back(c.k);
    }
  }
  double sum = 0.0;
  for (double x : out.per_repeat) sum += x;
  out.cov = sum / static_cast<double>(out.per_repeat.size());
  return out;
}

namespace {

std::vector<std::string> failing_utterances(const RunLog& log) {
  std::vector<std::string> out;
  for (const auto& r : log.records) {
    if (r.verdict.failed()) out.push_back(r.input.utterance);
  }
  return out;
}

std::vector<Point> to_points(std::vector<EmbeddingVector> vs) {
  std::vector<Point> out;
  out.reserve(vs.size());
  for (auto& v : vs) out.push_back(std::move(v.values));
  return out;
}

}  // namespace

CoverageResult failure_coverage(std::span<const RunLog> logs,
                                std::string_view target_generator,
                                Embedder& embedder, std::uint64_t seed,
                                std::size_t repeats) {
  std::vector<std::string> space;
  std::vector<std::string> target;
  for (const auto& log : logs) {
    auto f = failing_utterances(log);
    if (log.generator_name == target_generator) {
      target.insert(target.end(), f.begin(), f.end());
    }
    space.insert(space.end(), f.begin(), f.end());
  }
  auto space_points = to_points(embedder.embed_batch(space));
  auto target_points = to_points(embedder.embed_batch(target));
  return coverage_from_points(space_points, target_points, seed, repeats);
}

MetricsReport compute_metrics(std::span<const RunLog> logs, Embedder& embedder,
                              std::uint64_t seed, RateDenominator denominator) {
  MetricsReport report;
  if (logs.empty()) return report;
  for (const auto& log : logs) {
    if (log.manual_id != logs.front().manual_id) {
      throw ValidationError("runs use different manuals: \"" +
                            logs.front().manual_id + "\" and \"" +
                            log.manual_id + "\"");
    }
    if (log.total_warnings == 0) {
      throw ValidationError("run " + log.run_id + " reports zero manual warnings");
    }
  }

  // Failure space per SUT label.
  std::map<std::string, std::vector<std::size_t>> by_sut;
  for (std::size_t i = 0; i < logs.size(); ++i) by_sut[logs[i].sut_label].push_back(i);

  for (const auto& [sut, members] : by_sut) {
    std::vector<std::string> utterances;
    std::vector<std::pair<std::size_t, std::size_t>> ranges(logs.size());
    for (auto i : members) {
      auto f = failing_utterances(logs[i]);
      ranges[i] = {utterances.size(), utterances.size() + f.size()};
      utterances.insert(utterances.end(), f.begin(), f.end());
    }
    const auto space = utterances.empty() ? std::vector<Point>{}
                                           : to_points(embedder.embed_batch(utterances));

    for (auto i : members) {
      const auto& log = logs[i];
      RunMetrics m;
      m.run_id = log.run_id;
      m.generator = log.generator_name;
      m.sut = log.sut_label;
      m.manual_id = log.manual_id;
      m.W = warnings_ignored(log);
      m.W_prime = static_cast<double>(m.W) / static_cast<double>(log.total_warnings);
      m.failures = failure_count(log);
      m.generated = log.generated_count;
      m.executed = log.records.size();
      try {
        m.rate = failure_rate(log, denominator);
      } catch (const UndefinedError&) {
        m.rate = 0.0;
      }
      auto [b, e] = ranges[i];
      std::span<const Point> target(space.data() + b, e - b);
      m.coverage = coverage_from_points(space, target, seed);
      m.S = overall_score(m.W_prime, m.rate, m.coverage.defined ? m.coverage.cov : 0.0);
      report.runs.push_back(std::move(m));
    }
  }

  std::sort(report.runs.begin(), report.runs.end(),
            [](const RunMetrics& a, const RunMetrics& b) {
              return std::tie(a.generator, a.sut, a.run_id) <
                     std::tie(b.generator, b.sut, b.run_id);
            });

  for (const auto& m : report.runs) {
    if (report.rows.empty() || report.rows.back().generator != m.generator ||
        report.rows.back().sut != m.sut) {
      GeneratorMetrics g;
      g.generator = m.generator;
      g.sut = m.sut;
      g.manual_id = m.manual_id;
      g.cov_defined = m.coverage.defined;
      g.cov_per_repeat.assign(m.coverage.per_repeat.size(), 0.0);
      report.rows.push_back(std::move(g));
    }
    auto& g = report.rows.back();
    ++g.runs;
    g.W += static_cast<double>(m.W);
    g.W_prime += m.W_prime;
    g.rate += m.rate;
    g.cov += m.coverage.defined ? m.coverage.cov : 0.0;
    g.S += m.S;
    g.failures += static_cast<double>(m.failures);
    for (std::size_t r = 0; r < g.cov_per_repeat.size() && r < m.coverage.per_repeat.size(); ++r) {
      g.cov_per_repeat[r] += m.coverage.per_repeat[r];
    }
  }
  for (auto& g : report.rows) {
    const double n = static_cast<double>(g.runs);
    g.W /= n;
    g.W_prime /= n;
    g.rate /= n;
    g.cov /= n;
    g.S /= n;
    g.failures /= n;
    for (double& x : g.cov_per_repeat) x /= n;
  }
  return report;
}

namespace {

nlohmann::json coverage_to_json(const CoverageResult& c) {
  return {{"defined", c.defined},
          {"cov", c.cov},
          {"per_repeat", c.per_repeat},
          {"k_per_repeat", c.k_per_repeat},
          {"note", c.note}};
}

CoverageResult coverage_from_json(const nlohmann::json& j) {
  CoverageResult c;
  c.defined = j.at("defined").get<bool>();
  c.cov = j.at("cov").get<double>();
  c.per_repeat = j.at("per_repeat").get<std::vector<double>>();
  c.k_per_repeat = j.value("k_per_repeat", std::vector<std::size_t>{});
  c.note = j.value("note", std::string{});
  return c;
}

std::string fmt(double x, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::json metrics_to_json(const MetricsReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& g : report.rows) {
    rows.push_back({{"generator", g.generator},
                    {"sut", g.sut},
                    {"manual_id", g.manual_id},
                    {"runs", g.runs},
                    {"W", g.W},
                    {"W_prime", g.W_prime},
                    {"rate", g.rate},
                    {"cov", g.cov},
                    {"cov_defined", g.cov_defined},
                    {"cov_per_repeat", g.cov_per_repeat},
                    {"S", g.S},
                    {"failures", g.failures}});
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& m : report.runs) {
    runs.push_back({{"run_id", m.run_id},
                    {"generator", m.generator},
                    {"sut", m.sut},
                    {"manual_id", m.manual_id},
                    {"W", m.W},
                    {"W_prime", m.W_prime},
                    {"rate", m.rate},
                    {"coverage", coverage_to_json(m.coverage)},
                    {"S", m.S},
                    {"failures", m.failures},
                    {"generated", m.generated},
                    {"executed", m.executed}});
  }
  return {{"rows", std::move(rows)}, {"runs", std::move(runs)}};
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    for (const auto& x : j.at("rows")) {
      GeneratorMetrics g;
      g.generator = x.at("generator").get<std::string>();
      g.sut = x.at("sut").get<std::string>();
      g.manual_id = x.at("manual_id").get<std::string>();
      g.runs = x.at("runs").get<std::size_t>();
      g.W = x.at("W").get<double>();
      g.W_prime = x.at("W_prime").get<double>();
      g.rate = x.at("rate").get<double>();
      g.cov = x.at("cov").get<double>();
      g.cov_defined = x.at("cov_defined").get<bool>();
      g.cov_per_repeat = x.at("cov_per_repeat").get<std::vector<double>>();
      g.S = x.at("S").get<double>();
      g.failures = x.at("failures").get<double>();
      r.rows.push_back(std::move(g));
    }
    for (const auto& x : j.value("runs", nlohmann::json::array())) {
      RunMetrics m;
      m.run_id = x.at("run_id").get<std::string>();
      m.generator = x.at("generator").get<std::string>();
      m.sut = x.at("sut").get<std::string>();
      m.manual_id = x.at("manual_id").get<std::string>();
      m.W = x.at("W").get<std::size_t>();
      m.W_prime = x.at("W_prime").get<double>();
      m.rate = x.at("rate").get<double>();
      m.coverage = coverage_from_json(x.at("coverage"));
      m.S = x.at("S").get<double>();
      m.failures = x.at("failures").get<std::size_t>();
      m.generated = x.at("generated").get<std::size_t>();
      m.executed = x.at("executed").get<std::size_t>();
      r.runs.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed metrics document: ") + e.what());
  }
  return r;
}

std::string render_report(const MetricsReport& report, std::string_view format) {
  std::ostringstream out;
  if (format == "table") {
    out << "generator,sut,manual,runs,failures,W,W_prime,Rate,Cov,Cov_defined,S\n";
    for (const auto& g : report.rows) {
      out << csv_field(g.generator) << ',' << csv_field(g.sut) << ','
          << csv_field(g.manual_id) << ',' << g.runs << ',' << fmt(g.failures, 2)
          << ',' << fmt(g.W, 2) << ',' << fmt(g.W_prime) << ',' << fmt(g.rate)
          << ',' << fmt(g.cov) << ',' << (g.cov_defined ? "true" : "false") << ','
          << fmt(g.S) << '\n';
    }
  } else if (format == "records") {
    auto j = metrics_to_json(report);
    for (const auto& row : j["rows"]) out << row.dump() << '\n';
  } else if (format == "json") {
    out << metrics_to_json(report).dump(2) << '\n';
  } else if (format == "coverage") {
    out << "run_id,generator,sut,repeat,k,cov\n";
    for (const auto& m : report.runs) {
      for (std::size_t r = 0; r < m.coverage.per_repeat.size(); ++r) {
        out << csv_field(m.run_id) << ',' << csv_field(m.generator) << ','
            << csv_field(m.sut) << ',' << r << ','
            << (r < m.coverage.k_per_repeat.size() ? m.coverage.k_per_repeat[r] : 0)
            << ',' << fmt(m.coverage.per_repeat[r], 6) << '\n';
      }
    }
  } else if (format == "text") {
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %-28s %5s %8s %8s %8s %8s\n",
                  "generator", "sut", "runs", "W'", "Rate", "Cov", "S");
    out << line;
    for (const auto& g : report.rows) {
      std::snprintf(line, sizeof line, "%-16s %-28s %5zu %8.3f %8.3f %7.3f%s %8.3f\n",
                    g.generator.c_str(), g.sut.c_str(), g.runs, g.W_prime, g.rate,
                    g.cov, g.cov_defined ? " " : "*", g.S);
      out << line;
    }
    if (std::any_of(report.rows.begin(), report.rows.end(),
                    [](const GeneratorMetrics& g) { return !g.cov_defined; })) {
      out << "* coverage undefined (fewer than three failures); S uses Cov = 0\n";
    }
  } else {
    throw PreconditionError("unsupported report format \"" + std::string(format) +
                            "\" (expected table, records, json, coverage or text)");
  }
  return out.str();
}

}  // namespace warnbench
