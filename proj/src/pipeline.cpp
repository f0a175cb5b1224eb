#include "warnbench/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "warnbench/error.hpp"
#include "warnbench/text.hpp"
#include "warnbench/version.hpp"

namespace warnbench {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path RunConfig::resolve(const std::string& p) const {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

namespace {

template <typename T>
T field(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("config.") + key + ": wrong type");
  }
}

json object_field(const json& j, const char* key, json fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_object()) {
    throw ParseError(std::string("config.") + key + ": expected an object");
  }
  return *it;
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ParseError("config: expected an object");
  RunConfig c;
  c.base_dir = base_dir;
  c.manual = field<std::string>(j, "manual", "");
  c.dictionary = field<std::string>(j, "dictionary", "");

  if (auto it = j.find("generator"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      c.generator = it->get<std::string>();
    } else if (it->is_object()) {
      c.generator = field<std::string>(*it, "name", "");
      c.generator_settings = object_field(*it, "settings", json::object());
    } else {
      throw ParseError("config.generator: expected a name or an object");
    }
  }
  c.sut = object_field(j, "sut", c.sut);
  c.oracle = object_field(j, "oracle", c.oracle);
  c.embedder = object_field(j, "embedder", c.embedder);
  c.llm = object_field(j, "llm", nullptr);
  c.bench = object_field(j, "bench", nullptr);

  if (auto it = j.find("budget"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("config.budget: expected an object");
    if (it->contains("seconds")) {
      const auto& s = (*it)["seconds"];
      c.budget.seconds = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
    }
    if (it->contains("max_generations") && !(*it)["max_generations"].is_null()) {
      c.budget.max_generations = (*it)["max_generations"].get<std::size_t>();
    }
  }
  c.seed = field<std::uint64_t>(j, "seed", c.seed);
  c.dedup_threshold = field<double>(j, "dedup_threshold", c.dedup_threshold);
  c.rate_denominator =
      rate_denominator_from_string(field<std::string>(j, "rate_denominator", "generated"));
  c.max_consecutive_errors =
      field<std::size_t>(j, "max_consecutive_errors", c.max_consecutive_errors);
  c.output_dir = field<std::string>(j, "output_dir", c.output_dir);

  // Invariants.
  const bool has_time = c.budget.seconds && *c.budget.seconds > 0.0;
  if (!has_time && !c.budget.max_generations) {
    throw ValidationError("config.budget: needs seconds > 0 or max_generations");
  }
  if (c.budget.seconds && *c.budget.seconds < 0.0) {
    throw ValidationError("config.budget.seconds: must not be negative");
  }
  if (c.dedup_threshold < 0.0) {
    throw ValidationError("config.dedup_threshold: must not be negative");
  }
  if (!c.generator.empty() && !has_generator(c.generator)) {
    throw ValidationError("config.generator: unknown generator \"" + c.generator + "\"");
  }
  for (const auto& [key, kinds] :
       {std::pair<const char*, std::vector<std::string>>{"sut", {"simulated", "http"}},
        {"oracle", {"keyword", "llm"}},
        {"embedder", {"hashing", "http"}}}) {
    const json& section = key == std::string("sut")      ? c.sut
                          : key == std::string("oracle") ? c.oracle
                                                         : c.embedder;
    auto kind = section.value("kind", kinds.front());
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
      throw ValidationError(std::string("config.") + key + ".kind: unknown kind \"" +
                            kind + "\"");
    }
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json run_config_to_json(const RunConfig& c) {
  json budget{{"seconds", nullptr}, {"max_generations", nullptr}};
  if (c.budget.seconds) budget["seconds"] = *c.budget.seconds;
  if (c.budget.max_generations) budget["max_generations"] = *c.budget.max_generations;
  return {{"manual", c.manual},
          {"dictionary", c.dictionary},
          {"generator", {{"name", c.generator}, {"settings", c.generator_settings}}},
          {"sut", c.sut},
          {"oracle", c.oracle},
          {"embedder", c.embedder},
          {"llm", c.llm},
          {"budget", budget},
          {"seed", c.seed},
          {"dedup_threshold", c.dedup_threshold},
          {"rate_denominator", to_string(c.rate_denominator)},
          {"max_consecutive_errors", c.max_consecutive_errors},
          {"output_dir", c.output_dir}};
}

std::string to_string(Disposition d) {
  switch (d) {
    case Disposition::Executed:
      return "executed";
    case Disposition::Rejected:
      return "rejected";
    case Disposition::Errored:
      return "errored";
  }
  return "unknown";
}

namespace {

Disposition disposition_from_string(const std::string& s) {
  if (s == "executed") return Disposition::Executed;
  if (s == "rejected") return Disposition::Rejected;
  if (s == "errored") return Disposition::Errored;
  throw ParseError("unknown disposition \"" + s + "\"");
}

}  // namespace

json generation_record_to_json(const GenerationRecord& r) {
  json j{{"seq", r.seq},
         {"disposition", to_string(r.disposition)},
         {"input", test_input_to_json(r.input)}};
  if (!r.reasons.empty()) {
    json reasons = json::array();
    for (const auto& x : r.reasons) reasons.push_back(reason_to_json(x));
    j["reasons"] = std::move(reasons);
  }
  if (r.answer) {
    j["answer"] = {{"text", r.answer->text},
                   {"retrieved_doc_ids", r.answer->retrieved_doc_ids}};
  }
  if (r.verdict) j["verdict"] = verdict_to_json(*r.verdict);
  if (!r.error_stage.empty()) {
    j["error"] = {{"stage", r.error_stage}, {"message", r.error_message}};
  }
  return j;
}

GenerationRecord generation_record_from_json(const json& j) {
  GenerationRecord r;
  r.seq = j.at("seq").get<std::size_t>();
  r.disposition = disposition_from_string(j.at("disposition").get<std::string>());
  r.input = test_input_from_json(j.at("input"));
  if (auto it = j.find("reasons"); it != j.end()) {
    for (const auto& x : *it) r.reasons.push_back(reason_from_json(x));
  }
  if (auto it = j.find("answer"); it != j.end()) {
    SutAnswer a;
    a.text = it->at("text").get<std::string>();
    a.retrieved_doc_ids = it->at("retrieved_doc_ids").get<std::vector<std::string>>();
    r.answer = std::move(a);
  }
  if (auto it = j.find("verdict"); it != j.end()) r.verdict = verdict_from_json(*it);
  if (auto it = j.find("error"); it != j.end()) {
    r.error_stage = it->at("stage").get<std::string>();
    r.error_message = it->at("message").get<std::string>();
  }
  return r;
}

namespace {

// Where the artifact goes does not influence its content.
json artifact_snapshot(const RunConfig& config) {
  auto j = run_config_to_json(config);
  j.erase("output_dir");
  return j;
}

}  // namespace

std::string make_run_id(const RunConfig& config, std::string_view manual_id) {
  auto snapshot = artifact_snapshot(config);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(
                    text::fnv1a64(snapshot.dump() + "|" + std::string(manual_id))));
  return config.generator + "-s" + std::to_string(config.seed) + "-" +
         std::string(hash, 8);
}

namespace {

class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, const json& header) : dir_(std::move(dir)) {
    if (fs::exists(dir_ / "records.jsonl")) {
      throw IoError("artifact already exists: " + dir_.string());
    }
    fs::create_directories(dir_);
    write_file("config.json", header.dump(2) + "\n");
    records_.open(dir_ / "records.jsonl", std::ios::binary | std::ios::trunc);
    timings_.open(dir_ / "timings.jsonl", std::ios::binary | std::ios::trunc);
    if (!records_ || !timings_) {
      throw IoError("cannot write artifact files in " + dir_.string());
    }
  }

  void record(const GenerationRecord& r, const json& timing) {
    records_ << generation_record_to_json(r).dump() << '\n';
    records_.flush();
    timings_ << timing.dump() << '\n';
    timings_.flush();
  }

  void finish(const json& summary, const json& timing) {
    write_file("summary.json", summary.dump(2) + "\n");
    write_file("timings.json", timing.dump(2) + "\n");
  }

 private:
  void write_file(const char* name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir_ / name).string());
    out << content;
  }

  fs::path dir_;
  std::ofstream records_;
  std::ofstream timings_;
};

double ms_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t)
      .count();
}

}  // namespace

RunArtifact run(const RunConfig& config, RunComponents c) {
  if (c.generator.name().empty()) throw PreconditionError("generator has no name");
  RunConfig effective = config;
  effective.generator = c.generator.name();

  RunArtifact art;
  art.run_id = make_run_id(effective, c.manual.id);
  art.dir = effective.resolve(effective.output_dir) / art.run_id;
  art.log.run_id = art.run_id;
  art.log.generator_name = c.generator.name();
  art.log.sut_label = c.sut.label();
  art.log.manual_id = c.manual.id;
  art.log.total_warnings = total_warnings(c.manual);
  art.log.config = artifact_snapshot(effective);

  const json header{{"harness_version", kHarnessVersion},
                    {"run_id", art.run_id},
                    {"generator", art.log.generator_name},
                    {"sut_label", art.log.sut_label},
                    {"judge", c.judge.name()},
                    {"embedder_provider", c.embedder.provider_id()},
                    {"manual_id", c.manual.id},
                    {"manual_title", c.manual.title},
                    {"total_warnings", art.log.total_warnings},
                    {"config", art.log.config}};
  ArtifactWriter writer(art.dir, header);

  Validator validator(c.dictionary, c.embedder, effective.dedup_threshold);
  GeneratorContext ctx{c.manual, {}, effective.seed};
  const auto started = std::chrono::steady_clock::now();
  std::size_t consecutive_errors = 0;
  art.status = "completed";

  for (std::size_t seq = 0;; ++seq) {
    if (effective.budget.max_generations && seq >= *effective.budget.max_generations) break;
    if (effective.budget.seconds && ms_since(started) >= *effective.budget.seconds * 1000.0) {
      break;
    }

    GenerationRecord rec;
    rec.seq = seq;
    json timing{{"seq", seq}};
    auto fail = [&](const char* stage, const std::string& message) {
      rec.disposition = Disposition::Errored;
      rec.error_stage = stage;
      rec.error_message = message;
      spdlog::warn("{} {}: {}", stage, rec.input.id, message);
    };

    auto t0 = std::chrono::steady_clock::now();
    bool have_input = false;
    try {
      rec.input = c.generator.generate(ctx);
      have_input = true;
    } catch (const std::exception& e) {
      rec.input = TestInput{};
      fail("generate", e.what());
    }
    timing["generate_ms"] = ms_since(t0);
    char id[32];
    std::snprintf(id, sizeof id, "t%06zu", seq);
    rec.input.id = id;
    rec.input.created_at = seq;
    if (rec.input.generator_name.empty()) rec.input.generator_name = c.generator.name();
    if (have_input && text::trim(rec.input.utterance).empty()) {
      have_input = false;
      fail("generate", "generator produced an empty utterance");
    }

    ValidationVerdict validation;
    if (have_input) {
      t0 = std::chrono::steady_clock::now();
      try {
        validation = validator.admit(rec.input.id, rec.input.utterance);
        if (!validation.valid) {
          rec.disposition = Disposition::Rejected;
          rec.reasons = validation.reasons;
        }
      } catch (const std::exception& e) {
        have_input = false;
        fail("validate", e.what());
      }
      timing["validate_ms"] = ms_since(t0);
    }

    if (have_input && validation.valid) {
      t0 = std::chrono::steady_clock::now();
      try {
        rec.answer = c.sut.answer(rec.input.utterance);
      } catch (const std::exception& e) {
        fail("sut", e.what());
      }
      timing["sut_ms"] = ms_since(t0);

      if (rec.answer) {
        const Warning* target = rec.input.target_warning_id
                                    ? find_warning(c.manual, *rec.input.target_warning_id)
                                    : nullptr;
        t0 = std::chrono::steady_clock::now();
        if (target == nullptr) {
          fail("judge", "input has no resolvable target warning");
        } else {
          try {
            rec.verdict = c.judge.judge(rec.input.utterance, rec.answer->text, *target);
            rec.disposition = Disposition::Executed;
          } catch (const std::exception& e) {
            fail("judge", e.what());
          }
        }
        timing["judge_ms"] = ms_since(t0);
      }
    }

    switch (rec.disposition) {
      case Disposition::Executed:
        art.log.records.push_back({rec.input, *rec.answer, *rec.verdict});
        consecutive_errors = 0;
        break;
      case Disposition::Rejected:
        ++art.rejected;
        consecutive_errors = 0;
        break;
      case Disposition::Errored:
        ++art.errored;
        ++consecutive_errors;
        break;
    }
    ++art.log.generated_count;
    writer.record(rec, timing);

    ctx.history.push_back({rec.input, validation, rec.verdict});
    if (rec.disposition != Disposition::Errored || rec.error_stage != "generate") {
      try {
        c.generator.update_state(ctx, rec.input, rec.verdict);
      } catch (const std::exception& e) {
        spdlog::warn("update_state failed for {}: {}", rec.input.id, e.what());
      }
    }

    if (consecutive_errors >= effective.max_consecutive_errors) {
      art.status = "failed";
      art.error = "aborted after " + std::to_string(consecutive_errors) +
                  " consecutive errors; last: " + rec.error_stage + ": " +
                  rec.error_message;
      spdlog::error("{}", art.error);
      break;
    }
  }

  art.wall_seconds = ms_since(started) / 1000.0;
  json summary{{"status", art.status},
               {"generated_count", art.log.generated_count},
               {"executed", art.log.records.size()},
               {"rejected", art.rejected},
               {"errored", art.errored},
               {"failures", failure_count(art.log)}};
  if (!art.error.empty()) summary["error"] = art.error;
  writer.finish(summary, {{"wall_seconds", art.wall_seconds}});
  return art;
}

RunArtifact run(const RunConfig& config) {
  if (config.generator.empty()) throw ValidationError("config.generator: missing");
  if (config.manual.empty()) throw ValidationError("config.manual: missing");
  if (config.dictionary.empty()) throw ValidationError("config.dictionary: missing");

  const Manual manual = load_manual(config.resolve(config.manual));
  const Dictionary dictionary = Dictionary::load(config.resolve(config.dictionary));
  auto embedder = make_embedder(config.embedder);
  auto sut = make_sut(config.sut, manual);
  json oracle = config.oracle;
  if (oracle.contains("prompt_path")) {
    oracle["prompt_path"] = config.resolve(oracle["prompt_path"].get<std::string>()).string();
  }
  auto judge = make_judge(oracle);
  GeneratorServices services;
  if (!config.llm.is_null()) {
    services.llm = std::make_shared<HttpChatClient>(chat_config_from_json(config.llm));
  }
  auto generator = make_generator(config.generator, config.generator_settings, services);
  return run(config, {manual, *generator, *sut, *judge, *embedder, dictionary});
}

std::vector<GenerationRecord> load_generation_records(const fs::path& artifact_dir) {
  std::ifstream in(artifact_dir / "records.jsonl", std::ios::binary);
  if (!in) throw IoError("cannot open " + (artifact_dir / "records.jsonl").string());
  std::vector<GenerationRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(generation_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      // A torn final line comes from an interrupted run; anything earlier is
      // corruption.
      if (in.peek() == std::char_traits<char>::eof()) {
        spdlog::warn("{}: ignoring incomplete final record", artifact_dir.string());
        break;
      }
      throw ParseError((artifact_dir / "records.jsonl").string() + ":" +
                       std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

json load_header(const fs::path& artifact_dir) {
  std::ifstream in(artifact_dir / "config.json", std::ios::binary);
  if (!in) throw IoError("cannot open " + (artifact_dir / "config.json").string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError((artifact_dir / "config.json").string() + ": " + e.what());
  }
}

}  // namespace

RunLog load_run_log(const fs::path& artifact_dir) {
  const json header = load_header(artifact_dir);
  RunLog log;
  try {
    log.run_id = header.at("run_id").get<std::string>();
    log.generator_name = header.at("generator").get<std::string>();
    log.sut_label = header.at("sut_label").get<std::string>();
    log.manual_id = header.at("manual_id").get<std::string>();
    log.total_warnings = header.at("total_warnings").get<std::size_t>();
    log.config = header.at("config");
  } catch (const json::exception& e) {
    throw ParseError((artifact_dir / "config.json").string() + ": " + e.what());
  }
  for (auto& r : load_generation_records(artifact_dir)) {
    ++log.generated_count;
    if (r.disposition == Disposition::Executed && r.answer && r.verdict) {
      log.records.push_back({std::move(r.input), std::move(*r.answer), std::move(*r.verdict)});
    }
  }
  return log;
}

MetricsReport compute_metrics(std::span<const fs::path> artifact_dirs,
                              const MetricsOptions& options) {
  if (artifact_dirs.empty()) throw PreconditionError("metrics needs at least one artifact");
  std::vector<RunLog> logs;
  std::string provider;
  for (const auto& dir : artifact_dirs) {
    const json header = load_header(dir);
    auto p = header.value("embedder_provider", std::string{});
    if (options.embedder.is_null()) {
      if (logs.empty()) {
        provider = p;
      } else if (p != provider) {
        throw ValidationError("artifacts were recorded with different embedders: \"" +
                              provider + "\" and \"" + p + "\"");
      }
    }
    logs.push_back(load_run_log(dir));
  }
  for (const auto& l : logs) {
    if (l.manual_id != logs.front().manual_id) {
      throw ValidationError("artifacts use different manuals: \"" +
                            logs.front().manual_id + "\" and \"" + l.manual_id + "\"");
    }
  }
  json embedder_cfg = options.embedder.is_null()
                          ? logs.front().config.value("embedder", json{{"kind", "hashing"}})
                          : options.embedder;
  auto embedder = make_embedder(embedder_cfg);
  const auto denominator = options.rate_denominator.value_or(
      rate_denominator_from_string(logs.front().config.value("rate_denominator", "generated")));
  return compute_metrics(logs, *embedder, options.seed, denominator);
}

std::vector<RunArtifact> bench(const RunConfig& config) {
  if (config.bench.is_null()) throw ValidationError("config.bench: missing");
  const json& b = config.bench;
  const std::size_t repeats = b.value("repeats", std::size_t{6});

  std::vector<std::pair<std::string, json>> generators;
  if (auto it = b.find("generators"); it != b.end()) {
    for (const auto& g : *it) {
      if (g.is_string()) {
        generators.emplace_back(g.get<std::string>(), json::object());
      } else {
        generators.emplace_back(g.at("name").get<std::string>(),
                                g.value("settings", json::object()));
      }
    }
  } else {
    generators.emplace_back(config.generator, config.generator_settings);
  }
  for (const auto& [name, _] : generators) {
    if (!has_generator(name)) {
      throw ValidationError("config.bench.generators: unknown generator \"" + name + "\"");
    }
  }
  std::vector<json> suts = b.contains("suts") ? b["suts"].get<std::vector<json>>()
                                              : std::vector<json>{config.sut};
  std::vector<std::string> manuals = b.contains("manuals")
                                         ? b["manuals"].get<std::vector<std::string>>()
                                         : std::vector<std::string>{config.manual};

  std::vector<RunArtifact> out;
  for (const auto& manual : manuals) {
    for (const auto& sut : suts) {
      for (const auto& [name, settings] : generators) {
        for (std::size_t r = 0; r < repeats; ++r) {
          RunConfig rc = config;
          rc.bench = nullptr;
          rc.manual = manual;
          rc.sut = sut;
          rc.generator = name;
          rc.generator_settings = settings;
          rc.seed = config.seed + r;
          spdlog::info("bench: manual={} sut={} generator={} repeat={}", manual,
                       sut.value("kind", "simulated"), name, r);
          out.push_back(run(rc));
        }
      }
    }
  }
  return out;
}

JudgeBenchReport run_judge_bench(const RunConfig& config, const fs::path& dataset) {
  json oracle = config.oracle;
  if (oracle.contains("prompt_path")) {
    oracle["prompt_path"] = config.resolve(oracle["prompt_path"].get<std::string>()).string();
  }
  auto judge = make_judge(oracle);
  auto pairs = load_labeled_pairs(dataset);
  return bench_judge(pairs, *judge);
}

}  // namespace warnbench
