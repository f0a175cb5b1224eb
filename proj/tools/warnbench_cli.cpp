// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "warnbench/warnbench.h"

namespace {

struct CString {
  char* p = nullptr;
  ~CString() { wb_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

using ConfigPtr = std::unique_ptr<wb_config, decltype(&wb_config_free)>;

int fail(wb_status st) {
  std::fprintf(stderr, "error (%s): %s\n", wb_status_name(st), wb_last_error());
  return 1 + static_cast<int>(st);
}

int write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    if (!text.empty() && text.back() != '\n') std::fputc('\n', stdout);
    return 0;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::fprintf(stderr, "error (io): cannot write %s\n", path.c_str());
    return 1 + WB_ERR_IO;
  }
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  return 0;
}

// Loads the config file and applies command-line overrides.
wb_status load_config(const std::string& path, const std::string& overrides,
                      ConfigPtr& out) {
  wb_config* raw = nullptr;
  wb_status st = wb_config_load(path.c_str(), &raw);
  if (st != WB_OK) return st;
  out.reset(raw);
  if (overrides != "{}") st = wb_config_override(out.get(), overrides.c_str());
  return st;
}

std::string json_escape(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out + "\"";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warning-omission test harness for manual-grounded assistants"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wb_version()));
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "Run one generator against one system under test");
  std::string run_config;
  std::string run_generator;
  long long run_seed = -1;
  long long run_max = -1;
  double run_seconds = -1.0;
  std::string run_output_dir;
  run_cmd->add_option("config", run_config, "Run configuration file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-g,--generator", run_generator, "Override the generator name");
  run_cmd->add_option("-s,--seed", run_seed, "Override the seed")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("-n,--max-generations", run_max, "Override the generation budget")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("-t,--seconds", run_seconds, "Override the time budget")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("-o,--output-dir", run_output_dir, "Override the output directory");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run the configured generator x SUT x manual x repeat matrix");
  std::string bench_config;
  std::string bench_summary;
  bench_cmd->add_option("config", bench_config, "Run configuration with a bench section")
      ->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--summary", bench_summary, "Write run summaries as JSON here");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Compute metrics over run artifacts");
  std::vector<std::string> metrics_dirs;
  long long metrics_seed = 0;
  std::string metrics_denominator;
  std::string metrics_format = "table";
  std::string metrics_output;
  std::string metrics_save;
  metrics_cmd->add_option("artifacts", metrics_dirs, "Run artifact directories")
      ->required()->check(CLI::ExistingDirectory);
  metrics_cmd->add_option("-s,--seed", metrics_seed, "Clustering seed")->check(CLI::NonNegativeNumber);
  metrics_cmd->add_option("--rate-denominator", metrics_denominator, "generated or executed")
      ->check(CLI::IsMember({"generated", "executed"}));
  metrics_cmd->add_option("-f,--format", metrics_format, "table, records, coverage, json, text")
      ->capture_default_str();
  metrics_cmd->add_option("-o,--output", metrics_output, "Write the report here");
  metrics_cmd->add_option("--save", metrics_save, "Also save the metrics as JSON for `report`");

  // report
  auto* report_cmd = app.add_subcommand("report", "Render saved metrics");
  std::string report_input;
  std::string report_format = "table";
  std::string report_output;
  report_cmd->add_option("metrics", report_input, "Metrics JSON written by `metrics --save`")
      ->required()->check(CLI::ExistingFile);
  report_cmd->add_option("-f,--format", report_format, "table, records, coverage, json, text")
      ->capture_default_str();
  report_cmd->add_option("-o,--output", report_output, "Write the report here");

  // judge-bench
  auto* jb_cmd = app.add_subcommand("judge-bench", "Score the configured judge on a labeled dataset");
  std::string jb_config;
  std::string jb_dataset;
  std::string jb_output;
  jb_cmd->add_option("config", jb_config, "Run configuration (oracle section)")
      ->required()->check(CLI::ExistingFile);
  jb_cmd->add_option("dataset", jb_dataset, "Labeled JSONL dataset")->required()->check(CLI::ExistingFile);
  jb_cmd->add_option("-o,--output", jb_output, "Write the report here");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "Check utterances against the validity rules");
  std::string val_dictionary;
  std::vector<std::string> val_utterances;
  double val_threshold = -1.0;
  val_cmd->add_option("-d,--dictionary", val_dictionary, "Word list")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("-t,--threshold", val_threshold, "Dedup threshold");
  val_cmd->add_option("utterances", val_utterances,
                      "Utterances; later ones are checked for duplicates of earlier valid ones")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors share the invalid-argument code.
    return app.exit(e) == 0 ? 0 : 1 + WB_ERR_INVALID_ARGUMENT;
  }

  if (wb_status st = wb_set_log_level(log_level.c_str()); st != WB_OK) return fail(st);

  if (*run_cmd) {
    std::string overrides = "{";
    auto add = [&](const std::string& kv) {
      if (overrides.size() > 1) overrides += ",";
      overrides += kv;
    };
    if (!run_generator.empty()) add("\"generator\":" + json_escape(run_generator));
    if (run_seed >= 0) add("\"seed\":" + std::to_string(run_seed));
    if (!run_output_dir.empty()) add("\"output_dir\":" + json_escape(run_output_dir));
    std::string budget;
    if (run_max >= 0) budget += "\"max_generations\":" + std::to_string(run_max);
    if (run_seconds >= 0) {
      if (!budget.empty()) budget += ",";
      budget += "\"seconds\":" + std::to_string(run_seconds);
    }
    if (!budget.empty()) add("\"budget\":{" + budget + "}");
    overrides += "}";

    ConfigPtr cfg(nullptr, &wb_config_free);
    if (wb_status st = load_config(run_config, overrides, cfg); st != WB_OK) return fail(st);
    wb_artifact* art = nullptr;
    if (wb_status st = wb_run(cfg.get(), &art); st != WB_OK) return fail(st);
    std::unique_ptr<wb_artifact, decltype(&wb_artifact_free)> guard(art, &wb_artifact_free);
    CString summary;
    if (wb_status st = wb_artifact_summary(art, &summary.p); st != WB_OK) return fail(st);
    write_output(summary.str(), "");
    return std::string(wb_artifact_status(art)) == "completed" ? 0 : 1 + WB_ERR_BACKEND;
  }

  if (*bench_cmd) {
    ConfigPtr cfg(nullptr, &wb_config_free);
    if (wb_status st = load_config(bench_config, "{}", cfg); st != WB_OK) return fail(st);
    CString summary;
    if (wb_status st = wb_bench(cfg.get(), &summary.p); st != WB_OK) return fail(st);
    return write_output(summary.str(), bench_summary);
  }

  if (*metrics_cmd) {
    std::vector<const char*> dirs;
    for (const auto& d : metrics_dirs) dirs.push_back(d.c_str());
    wb_metrics* m = nullptr;
    wb_status st = wb_metrics_compute(dirs.data(), dirs.size(),
                                      static_cast<uint64_t>(metrics_seed),
                                      metrics_denominator.empty() ? nullptr
                                                                  : metrics_denominator.c_str(),
                                      &m);
    if (st != WB_OK) return fail(st);
    std::unique_ptr<wb_metrics, decltype(&wb_metrics_free)> guard(m, &wb_metrics_free);
    if (!metrics_save.empty()) {
      CString saved;
      if ((st = wb_report(m, "json", &saved.p)) != WB_OK) return fail(st);
      if (int rc = write_output(saved.str(), metrics_save); rc != 0) return rc;
    }
    CString text;
    if ((st = wb_report(m, metrics_format.c_str(), &text.p)) != WB_OK) return fail(st);
    return write_output(text.str(), metrics_output);
  }

  if (*report_cmd) {
    wb_metrics* m = nullptr;
    if (wb_status st = wb_metrics_load(report_input.c_str(), &m); st != WB_OK) return fail(st);
    std::unique_ptr<wb_metrics, decltype(&wb_metrics_free)> guard(m, &wb_metrics_free);
    CString text;
    if (wb_status st = wb_report(m, report_format.c_str(), &text.p); st != WB_OK) return fail(st);
    return write_output(text.str(), report_output);
  }

  if (*jb_cmd) {
    ConfigPtr cfg(nullptr, &wb_config_free);
    if (wb_status st = load_config(jb_config, "{}", cfg); st != WB_OK) return fail(st);
    CString report;
    if (wb_status st = wb_judge_bench(cfg.get(), jb_dataset.c_str(), &report.p); st != WB_OK) {
      return fail(st);
    }
    return write_output(report.str(), jb_output);
  }

  if (*val_cmd) {
    wb_validator* v = nullptr;
    if (wb_status st = wb_validator_create(val_dictionary.c_str(), nullptr, val_threshold, &v);
        st != WB_OK) {
      return fail(st);
    }
    std::unique_ptr<wb_validator, decltype(&wb_validator_free)> guard(v, &wb_validator_free);
    bool all_valid = true;
    for (std::size_t i = 0; i < val_utterances.size(); ++i) {
      CString out;
      std::string id = "u" + std::to_string(i + 1);
      if (wb_status st = wb_validator_check(v, id.c_str(), val_utterances[i].c_str(), 1, &out.p);
          st != WB_OK) {
        return fail(st);
      }
      std::string line = out.str();
      if (line.find("\"valid\":true") == std::string::npos) all_valid = false;
      std::printf("{\"id\":%s,\"utterance\":%s,\"result\":%s}\n", json_escape(id).c_str(),
                  json_escape(val_utterances[i]).c_str(), line.c_str());
    }
    return all_valid ? 0 : 1;
  }
  return 0;
}
