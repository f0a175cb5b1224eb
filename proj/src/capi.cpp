#include "warnbench/warnbench.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "warnbench/error.hpp"
#include "warnbench/pipeline.hpp"
#include "warnbench/version.hpp"

using nlohmann::json;
namespace wb = warnbench;

struct wb_config {
  wb::RunConfig config;
};

struct wb_artifact {
  wb::RunArtifact artifact;
  std::string dir;
};

struct wb_metrics {
  wb::MetricsReport report;
};

struct wb_validator {
  std::unique_ptr<wb::Embedder> embedder;
  std::unique_ptr<wb::Validator> validator;
};

namespace {

thread_local std::string g_last_error;

wb_status status_of(wb::ErrorCode code) {
  return static_cast<wb_status>(static_cast<int>(code));
}

// Runs fn and maps exceptions to status codes.
template <typename F>
wb_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return WB_OK;
  } catch (const wb::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return WB_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return WB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return WB_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw wb::PreconditionError(std::string(what) + " must not be NULL");
}

json artifact_summary(const wb::RunArtifact& a) {
  json j{{"run_id", a.run_id},
         {"dir", a.dir.string()},
         {"status", a.status},
         {"generator", a.log.generator_name},
         {"sut_label", a.log.sut_label},
         {"generated_count", a.log.generated_count},
         {"executed", a.log.records.size()},
         {"rejected", a.rejected},
         {"errored", a.errored},
         {"failures", wb::failure_count(a.log)},
         {"wall_seconds", a.wall_seconds}};
  if (!a.error.empty()) j["error"] = a.error;
  return j;
}

// Adapts C callbacks to the generator interface.
class PluginGenerator : public wb::TestGenerator {
 public:
  PluginGenerator(std::string name, wb_generate_fn gen, wb_update_fn update, void* user)
      : name_(std::move(name)), gen_(gen), update_(update), user_(user) {}

  std::string name() const override { return name_; }

  wb::TestInput generate(const wb::GeneratorContext& ctx) override {
    json warnings = json::array();
    for (const auto& sw : wb::all_warnings(ctx.manual)) {
      warnings.push_back({{"id", sw.warning->id},
                          {"text", sw.warning->text},
                          {"component", sw.section->name}});
    }
    json last = nullptr;
    if (!ctx.history.empty()) {
      const auto& h = ctx.history.back();
      last = {{"input", wb::test_input_to_json(h.input)},
              {"valid", h.validation.valid},
              {"verdict", h.verdict ? wb::verdict_to_json(*h.verdict) : json(nullptr)}};
    }
    json context{{"seed", ctx.rng_seed},
                 {"history_size", ctx.history.size()},
                 {"manual_id", ctx.manual.id},
                 {"warnings", std::move(warnings)},
                 {"last", std::move(last)}};
    char* out = nullptr;
    int rc = gen_(context.dump().c_str(), &out, user_);
    std::unique_ptr<char, decltype(&std::free)> owned(out, &std::free);
    if (rc != 0 || out == nullptr) {
      throw wb::BackendError("generator plugin \"" + name_ + "\" returned " +
                                 std::to_string(rc),
                             false);
    }
    json j = json::parse(out);
    wb::TestInput t;
    t.utterance = j.at("utterance").get<std::string>();
    if (j.contains("target_warning_id") && !j["target_warning_id"].is_null()) {
      t.target_warning_id = j["target_warning_id"].get<std::string>();
    }
    t.generator_name = name_;
    return t;
  }

  void update_state(const wb::GeneratorContext&, const wb::TestInput& input,
                    const std::optional<wb::Verdict>& verdict) override {
    if (update_ == nullptr) return;
    json event{{"input", wb::test_input_to_json(input)},
               {"verdict", verdict ? wb::verdict_to_json(*verdict) : json(nullptr)}};
    update_(event.dump().c_str(), user_);
  }

 private:
  std::string name_;
  wb_generate_fn gen_;
  wb_update_fn update_;
  void* user_;
};

}  // namespace

extern "C" {

const char* wb_last_error(void) { return g_last_error.c_str(); }

const char* wb_version(void) { return wb::kHarnessVersion; }

const char* wb_status_name(wb_status status) {
  switch (status) {
    case WB_OK:
      return "ok";
    case WB_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case WB_ERR_PARSE:
      return "parse";
    case WB_ERR_VALIDATION:
      return "validation";
    case WB_ERR_IO:
      return "io";
    case WB_ERR_BACKEND:
      return "backend";
    case WB_ERR_UNDEFINED:
      return "undefined";
    case WB_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

void wb_string_free(char* s) { std::free(s); }

wb_status wb_set_log_level(const char* level) {
  return guarded([&] {
    require(level, "level");
    auto lvl = spdlog::level::from_str(level);
    if (lvl == spdlog::level::off && std::strcmp(level, "off") != 0) {
      throw wb::PreconditionError(std::string("unknown log level \"") + level + "\"");
    }
    spdlog::set_level(lvl);
  });
}

wb_status wb_config_load(const char* path, wb_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new wb_config{wb::load_run_config(path)};
  });
}

wb_status wb_config_parse(const char* text, const char* base_dir, wb_config** out) {
  return guarded([&] {
    require(text, "json");
    require(out, "out");
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw wb::ParseError(std::string("config: ") + e.what());
    }
    *out = new wb_config{wb::parse_run_config(j, base_dir ? base_dir : ".")};
  });
}

wb_status wb_config_override(wb_config* config, const char* text) {
  return guarded([&] {
    require(config, "config");
    require(text, "json");
    json patch = json::parse(text);
    if (!patch.is_object()) throw wb::ParseError("override: expected an object");
    json merged = wb::run_config_to_json(config->config);
    for (auto& [k, v] : patch.items()) {
      if (k == "budget" && v.is_object()) {
        for (auto& [bk, bv] : v.items()) merged["budget"][bk] = bv;
      } else {
        merged[k] = v;
      }
    }
    auto base = config->config.base_dir;
    config->config = wb::parse_run_config(merged, base);
  });
}

wb_status wb_config_to_json(const wb_config* config, char** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = dup_string(wb::run_config_to_json(config->config).dump(2));
  });
}

void wb_config_free(wb_config* config) { delete config; }

wb_status wb_run(const wb_config* config, wb_artifact** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    auto a = std::make_unique<wb_artifact>();
    a->artifact = wb::run(config->config);
    a->dir = a->artifact.dir.string();
    *out = a.release();
  });
}

const char* wb_artifact_run_id(const wb_artifact* a) {
  return a ? a->artifact.run_id.c_str() : "";
}

const char* wb_artifact_dir(const wb_artifact* a) { return a ? a->dir.c_str() : ""; }

const char* wb_artifact_status(const wb_artifact* a) {
  return a ? a->artifact.status.c_str() : "";
}

wb_status wb_artifact_summary(const wb_artifact* a, char** out) {
  return guarded([&] {
    require(a, "artifact");
    require(out, "out");
    *out = dup_string(artifact_summary(a->artifact).dump(2));
  });
}

void wb_artifact_free(wb_artifact* a) { delete a; }

wb_status wb_bench(const wb_config* config, char** out_json) {
  return guarded([&] {
    require(config, "config");
    require(out_json, "out_json");
    json arr = json::array();
    for (const auto& a : wb::bench(config->config)) arr.push_back(artifact_summary(a));
    *out_json = dup_string(arr.dump(2));
  });
}

wb_status wb_metrics_compute(const char* const* dirs, size_t n, uint64_t seed,
                             const char* rate_denominator, wb_metrics** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(dirs, "artifact_dirs");
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < n; ++i) {
      require(dirs[i], "artifact_dirs[i]");
      paths.emplace_back(dirs[i]);
    }
    wb::MetricsOptions opts;
    opts.seed = seed;
    if (rate_denominator != nullptr) {
      opts.rate_denominator = wb::rate_denominator_from_string(rate_denominator);
    }
    *out = new wb_metrics{wb::compute_metrics(paths, opts)};
  });
}

wb_status wb_metrics_load(const char* path, wb_metrics** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw wb::IoError(std::string("cannot open ") + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw wb::ParseError(std::string(path) + ": " + e.what());
    }
    *out = new wb_metrics{wb::metrics_from_json(j)};
  });
}

wb_status wb_report(const wb_metrics* metrics, const char* format, char** out) {
  return guarded([&] {
    require(metrics, "metrics");
    require(format, "format");
    require(out, "out");
    *out = dup_string(wb::render_report(metrics->report, format));
  });
}

void wb_metrics_free(wb_metrics* metrics) { delete metrics; }

wb_status wb_judge_bench(const wb_config* config, const char* dataset, char** out_json) {
  return guarded([&] {
    require(config, "config");
    require(dataset, "dataset_path");
    require(out_json, "out_json");
    auto report = wb::run_judge_bench(config->config, dataset);
    *out_json = dup_string(wb::bench_report_to_json(report).dump(2));
  });
}

wb_status wb_validator_create(const char* dictionary_path, const char* embedder_json,
                              double threshold, wb_validator** out) {
  return guarded([&] {
    require(dictionary_path, "dictionary_path");
    require(out, "out");
    json ecfg = embedder_json ? json::parse(embedder_json) : json{{"kind", "hashing"}};
    auto v = std::make_unique<wb_validator>();
    v->embedder = wb::make_embedder(ecfg);
    v->validator = std::make_unique<wb::Validator>(
        wb::Dictionary::load(dictionary_path), *v->embedder,
        threshold < 0.0 ? wb::kDefaultDedupThreshold : threshold);
    *out = v.release();
  });
}

wb_status wb_validator_check(wb_validator* v, const char* id, const char* utterance,
                             int admit, char** out_json) {
  return guarded([&] {
    require(v, "validator");
    require(utterance, "utterance");
    require(out_json, "out_json");
    wb::ValidationVerdict verdict;
    if (admit) {
      require(id, "id");
      verdict = v->validator->admit(id, utterance);
    } else {
      verdict = v->validator->check(utterance);
    }
    json reasons = json::array();
    for (const auto& r : verdict.reasons) reasons.push_back(wb::reason_to_json(r));
    *out_json = dup_string(json{{"valid", verdict.valid}, {"reasons", reasons}}.dump());
  });
}

void wb_validator_free(wb_validator* v) { delete v; }

wb_status wb_register_generator(const char* name, wb_generate_fn generate,
                                wb_update_fn update, void* user_data) {
  return guarded([&] {
    require(name, "name");
    if (generate == nullptr) throw wb::PreconditionError("generate must not be NULL");
    std::string n = name;
    if (wb::text::trim(n).empty()) throw wb::PreconditionError("name must not be empty");
    wb::register_generator(n, [=](const json&, const wb::GeneratorServices&) {
      return std::make_unique<PluginGenerator>(n, generate, update, user_data);
    });
  });
}

}  // extern "C"
