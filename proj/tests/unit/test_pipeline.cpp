#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "warnbench/error.hpp"
#include "warnbench/pipeline.hpp"

using namespace warnbench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

RunConfig base_config(const fs::path& out, std::size_t max_generations) {
  RunConfig c = parse_run_config(
      {{"manual", wbtest::sample_manual_path().string()},
       {"dictionary", wbtest::wordlist_path().string()},
       {"generator", "random"},
       {"sut", {{"kind", "simulated"}, {"omission_rate", 0.4}, {"seed", 7}}},
       {"budget", {{"max_generations", max_generations}}},
       {"seed", 42},
       {"output_dir", out.string()}},
      ".");
  return c;
}

// Emits a fixed list of utterances, all aimed at the first warning.
class ListGenerator : public TestGenerator {
 public:
  explicit ListGenerator(std::vector<std::string> utterances) : u_(std::move(utterances)) {}
  std::string name() const override { return "list"; }
  TestInput generate(const GeneratorContext& ctx) override {
    TestInput t;
    t.utterance = u_[ctx.history.size() % u_.size()];
    t.target_warning_id = all_warnings(ctx.manual).front().warning->id;
    return t;
  }
  void update_state(const GeneratorContext&, const TestInput&,
                    const std::optional<Verdict>& v) override {
    updates.push_back(v.has_value());
  }
  std::vector<bool> updates;

 private:
  std::vector<std::string> u_;
};

class CountingSut : public SystemUnderTest {
 public:
  std::string label() const override { return "counting"; }
  SutAnswer answer(std::string_view u) override {
    seen.emplace_back(u);
    if (fail) throw BackendError("connection refused", true);
    return {"Radar is limited in fog.", {}, 0.0};
  }
  std::vector<std::string> seen;
  bool fail = false;
};

}  // namespace

TEST(RunConfig, DefaultsAndRoundTrip) {
  auto c = parse_run_config({{"manual", "m.json"}, {"dictionary", "d.txt"}, {"generator", "random"}},
                            "/base");
  EXPECT_EQ(*c.budget.seconds, 7200.0);
  EXPECT_FALSE(c.budget.max_generations);
  EXPECT_EQ(c.sut["kind"], "simulated");
  EXPECT_EQ(c.oracle["kind"], "keyword");
  EXPECT_EQ(c.dedup_threshold, 0.95);
  EXPECT_EQ(c.rate_denominator, RateDenominator::Generated);
  EXPECT_EQ(c.resolve("m.json"), fs::path("/base/m.json"));
  EXPECT_EQ(c.resolve("/abs/x"), fs::path("/abs/x"));
  auto again = parse_run_config(run_config_to_json(c), "/base");
  EXPECT_EQ(run_config_to_json(again), run_config_to_json(c));
}

TEST(RunConfig, GeneratorObjectCarriesSettings) {
  auto c = parse_run_config({{"generator", {{"name", "atlas-like"}, {"settings", {{"decay", 0.3}}}}}});
  EXPECT_EQ(c.generator, "atlas-like");
  EXPECT_EQ(c.generator_settings["decay"], 0.3);
}

TEST(RunConfig, InvariantsAreEnforced) {
  EXPECT_THROW(parse_run_config({{"generator", "nope"}}), ValidationError);
  EXPECT_THROW(parse_run_config({{"budget", {{"seconds", 0}}}}), ValidationError);
  EXPECT_THROW(parse_run_config({{"budget", {{"seconds", nullptr}}}}), ValidationError);
  EXPECT_NO_THROW(parse_run_config({{"budget", {{"seconds", 0}, {"max_generations", 0}}}}));
  EXPECT_THROW(parse_run_config({{"sut", {{"kind", "magic"}}}}), ValidationError);
  EXPECT_THROW(parse_run_config({{"oracle", {{"kind", "magic"}}}}), ValidationError);
  EXPECT_THROW(parse_run_config({{"embedder", {{"kind", "magic"}}}}), ValidationError);
  EXPECT_THROW(parse_run_config({{"seed", "x"}}), ParseError);
  EXPECT_THROW(parse_run_config({{"rate_denominator", "x"}}), Error);
  EXPECT_THROW(parse_run_config(nlohmann::json::array()), ParseError);
  EXPECT_THROW(load_run_config("/nonexistent.json"), IoError);
}

TEST(Run, WritesOneRecordPerGenerateCall) {
  wbtest::TempDir dir;
  auto art = run(base_config(dir.path(), 40));
  EXPECT_EQ(art.status, "completed");
  EXPECT_EQ(art.log.generated_count, 40u);
  EXPECT_EQ(line_count(art.dir / "records.jsonl"), 40u);
  EXPECT_EQ(line_count(art.dir / "timings.jsonl"), 40u);
  auto records = load_generation_records(art.dir);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].seq, i);
    char id[16];
    std::snprintf(id, sizeof id, "t%06zu", i);
    EXPECT_EQ(records[i].input.id, id);
    EXPECT_EQ(records[i].disposition == Disposition::Executed, records[i].verdict.has_value());
  }
  auto header = nlohmann::json::parse(slurp(art.dir / "config.json"));
  EXPECT_EQ(header["harness_version"], "0.1.0");
  EXPECT_EQ(header["embedder_provider"], "hashing-bow-256");
  EXPECT_EQ(header["total_warnings"], 9);
  auto summary = nlohmann::json::parse(slurp(art.dir / "summary.json"));
  EXPECT_EQ(summary["status"], "completed");
  EXPECT_EQ(summary["generated_count"], 40);
}

TEST(Run, ArtifactIsByteStable) {
  wbtest::TempDir a, b;
  auto x = run(base_config(a.path(), 50));
  auto y = run(base_config(b.path(), 50));
  EXPECT_EQ(x.run_id, y.run_id);
  for (auto f : {"config.json", "records.jsonl", "summary.json"}) {
    EXPECT_EQ(slurp(x.dir / f), slurp(y.dir / f)) << f;
  }
}

TEST(Run, RefusesToOverwrite) {
  wbtest::TempDir dir;
  auto cfg = base_config(dir.path(), 3);
  run(cfg);
  EXPECT_THROW(run(cfg), IoError);
  cfg.seed = 43;
  EXPECT_NO_THROW(run(cfg));
}

TEST(Run, ZeroGenerationBudget) {
  wbtest::TempDir dir;
  auto art = run(base_config(dir.path(), 0));
  EXPECT_EQ(art.status, "completed");
  EXPECT_EQ(art.log.generated_count, 0u);
  EXPECT_EQ(slurp(art.dir / "records.jsonl"), "");
  std::vector<fs::path> dirs{art.dir};
  auto rep = compute_metrics(dirs);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_FALSE(rep.rows[0].cov_defined);
  EXPECT_NE(render_report(rep, "text").find("coverage undefined"), std::string::npos);
}

TEST(Run, TimeBudgetStopsTheLoop) {
  wbtest::TempDir dir;
  auto cfg = base_config(dir.path(), 0);
  cfg.budget.max_generations.reset();
  cfg.budget.seconds = 0.2;
  auto art = run(cfg);
  EXPECT_EQ(art.status, "completed");
  EXPECT_GT(art.log.generated_count, 0u);
  EXPECT_LT(art.wall_seconds, 5.0);
}

TEST(Run, RejectedInputsNeverReachTheSutOrTheIndex) {
  wbtest::TempDir dir;
  const auto& m = wbtest::sample_manual();
  auto dict = Dictionary::load(wbtest::wordlist_path());
  HashingEmbedder emb;
  KeywordJudge judge;
  CountingSut sut;
  ListGenerator gen({"Is radar cruise fine in fog?", "Is radar cruise fine in fog?",
                     "Is radar qwzxv fine in fog", "Is radar qwzxv fine in fog"});
  auto cfg = base_config(dir.path(), 8);
  auto art = run(cfg, {m, gen, sut, judge, emb, dict});
  auto records = load_generation_records(art.dir);
  ASSERT_EQ(records.size(), 8u);
  EXPECT_EQ(records[0].disposition, Disposition::Executed);
  EXPECT_EQ(records[1].disposition, Disposition::Rejected);
  EXPECT_EQ(records[1].reasons[0].kind, RejectReason::Kind::Duplicate);
  EXPECT_EQ(records[1].reasons[0].similar_id, "t000000");
  // The second non-English copy is not a duplicate of the first: rejected
  // inputs are never indexed.
  for (int i : {2, 3}) {
    EXPECT_EQ(records[i].disposition, Disposition::Rejected);
    ASSERT_EQ(records[i].reasons.size(), 1u);
    EXPECT_EQ(records[i].reasons[0].kind, RejectReason::Kind::NonEnglishWord);
  }
  EXPECT_EQ(sut.seen.size(), 1u);
  EXPECT_EQ(art.rejected, 7u);
  EXPECT_EQ(art.log.generated_count, 8u);
  EXPECT_EQ(gen.updates, (std::vector<bool>{true, false, false, false, false, false, false, false}));
}

TEST(Run, BackendFailuresAreRecordedAndAbortTheRun) {
  wbtest::TempDir dir;
  const auto& m = wbtest::sample_manual();
  auto dict = Dictionary::load(wbtest::wordlist_path());
  HashingEmbedder emb;
  KeywordJudge judge;
  CountingSut sut;
  sut.fail = true;
  RandomGenerator gen;
  auto cfg = base_config(dir.path(), 100);
  cfg.max_consecutive_errors = 4;
  auto art = run(cfg, {m, gen, sut, judge, emb, dict});
  EXPECT_EQ(art.status, "failed");
  EXPECT_EQ(art.errored, 4u);
  EXPECT_EQ(art.log.generated_count, 4u);
  EXPECT_NE(art.error.find("connection refused"), std::string::npos);
  auto records = load_generation_records(art.dir);
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0].disposition, Disposition::Errored);
  EXPECT_EQ(records[0].error_stage, "sut");
  auto summary = nlohmann::json::parse(slurp(art.dir / "summary.json"));
  EXPECT_EQ(summary["status"], "failed");
  EXPECT_TRUE(summary.contains("error"));
}

TEST(Run, ReloadedArtifactReproducesMetricsExactly) {
  wbtest::TempDir dir;
  auto art = run(base_config(dir.path(), 60));
  HashingEmbedder emb;
  std::vector<RunLog> mem{art.log};
  auto direct = compute_metrics(mem, emb, 3);
  std::vector<fs::path> dirs{art.dir};
  MetricsOptions opts;
  opts.seed = 3;
  auto loaded = compute_metrics(dirs, opts);
  EXPECT_EQ(metrics_to_json(direct).dump(), metrics_to_json(loaded).dump());
  auto log = load_run_log(art.dir);
  EXPECT_EQ(log.records.size(), art.log.records.size());
  EXPECT_EQ(log.config, art.log.config);
}

TEST(Run, TornFinalLineIsIgnored) {
  wbtest::TempDir dir;
  auto art = run(base_config(dir.path(), 5));
  {
    std::ofstream out(art.dir / "records.jsonl", std::ios::app);
    out << "{\"seq\": 5, \"dispos";
  }
  EXPECT_EQ(load_generation_records(art.dir).size(), 5u);
}

TEST(Metrics, ArtifactsMustShareTheManual) {
  wbtest::TempDir dir;
  auto a = run(base_config(dir.path(), 3));
  auto other = parse_manual(R"({"id":"other","title":"O","sections":[{"name":"Trunk",
      "warnings":[{"id":"w","text":"Mind the fumes."}]}]})");
  auto dict = Dictionary::load(wbtest::wordlist_path());
  HashingEmbedder emb;
  KeywordJudge judge;
  SimulatedSut sut(other, {0.5, 1, 3});
  RandomGenerator gen;
  auto b = run(base_config(dir.path(), 3), {other, gen, sut, judge, emb, dict});
  std::vector<fs::path> dirs{a.dir, b.dir};
  EXPECT_THROW(compute_metrics(dirs), ValidationError);
  std::vector<fs::path> none;
  EXPECT_THROW(compute_metrics(none), PreconditionError);
}

TEST(Bench, RunsTheMatrixWithSeedOffsets) {
  wbtest::TempDir dir;
  auto cfg = base_config(dir.path(), 10);
  cfg.bench = {{"generators", {"random", {{"name", "atlas-like"}, {"settings", {{"decay", 0.4}}}}}},
               {"suts", {{{"kind", "simulated"}, {"omission_rate", 0.2}},
                         {{"kind", "simulated"}, {"omission_rate", 0.6}}}},
               {"repeats", 2}};
  auto arts = bench(cfg);
  ASSERT_EQ(arts.size(), 8u);
  std::set<std::string> ids;
  for (const auto& a : arts) ids.insert(a.run_id);
  EXPECT_EQ(ids.size(), 8u);
  EXPECT_EQ(arts[0].log.config["seed"], 42);
  EXPECT_EQ(arts[1].log.config["seed"], 43);
  std::vector<fs::path> dirs;
  for (const auto& a : arts) dirs.push_back(a.dir);
  auto rep = compute_metrics(dirs);
  EXPECT_EQ(rep.rows.size(), 4u);
  for (const auto& r : rep.rows) EXPECT_EQ(r.runs, 2u);

  cfg.bench = nullptr;
  EXPECT_THROW(bench(cfg), ValidationError);
}

TEST(JudgeBench, KeywordOracleOnSample) {
  auto cfg = parse_run_config({{"oracle", {{"kind", "keyword"}}}});
  auto r = run_judge_bench(cfg, wbtest::source_path("data/judge_bench_sample.jsonl"));
  EXPECT_EQ(r.n, 10u);
}

TEST(Config, ShippedExampleParses) {
  auto c = load_run_config(wbtest::source_path("configs/example_run.json"));
  EXPECT_EQ(c.generator, "random");
  EXPECT_TRUE(fs::exists(c.resolve(c.manual)));
  EXPECT_TRUE(fs::exists(c.resolve(c.dictionary)));
  auto l = load_run_config(wbtest::source_path("configs/llm_run.json"));
  EXPECT_EQ(l.oracle["kind"], "llm");
}
