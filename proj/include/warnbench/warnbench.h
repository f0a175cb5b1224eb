#ifndef WARNBENCH_H
#define WARNBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WB_BUILDING_LIBRARY)
#    define WB_API __declspec(dllexport)
#  else
#    define WB_API __declspec(dllimport)
#  endif
#else
#  define WB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wb_status {
  WB_OK = 0,
  WB_ERR_INVALID_ARGUMENT = 1,
  WB_ERR_PARSE = 2,
  WB_ERR_VALIDATION = 3,
  WB_ERR_IO = 4,
  WB_ERR_BACKEND = 5,
  WB_ERR_UNDEFINED = 6,
  WB_ERR_INTERNAL = 7
} wb_status;

typedef struct wb_config wb_config;
typedef struct wb_artifact wb_artifact;
typedef struct wb_metrics wb_metrics;
typedef struct wb_validator wb_validator;

/* Message for the last failing call on this thread; never NULL. */
WB_API const char* wb_last_error(void);
WB_API const char* wb_version(void);
WB_API const char* wb_status_name(wb_status status);

/* Strings returned through char** out-parameters are owned by the caller. */
WB_API void wb_string_free(char* s);

/* Log level: "trace", "debug", "info", "warn", "error", "off". */
WB_API wb_status wb_set_log_level(const char* level);

/* ---- configuration ---- */

WB_API wb_status wb_config_load(const char* path, wb_config** out);
/* Relative paths inside json resolve against base_dir (NULL means "."). */
WB_API wb_status wb_config_parse(const char* json, const char* base_dir,
                                 wb_config** out);
/* Applies a JSON object of top-level overrides, then re-validates. */
WB_API wb_status wb_config_override(wb_config* config, const char* json);
WB_API wb_status wb_config_to_json(const wb_config* config, char** out);
WB_API void wb_config_free(wb_config* config);

/* ---- runs ---- */

WB_API wb_status wb_run(const wb_config* config, wb_artifact** out);
WB_API const char* wb_artifact_run_id(const wb_artifact* artifact);
WB_API const char* wb_artifact_dir(const wb_artifact* artifact);
/* "completed" or "failed". */
WB_API const char* wb_artifact_status(const wb_artifact* artifact);
/* JSON summary: counts, status, error, wall_seconds. */
WB_API wb_status wb_artifact_summary(const wb_artifact* artifact, char** out);
WB_API void wb_artifact_free(wb_artifact* artifact);

/* Runs the bench matrix; writes a JSON array of artifact summaries. */
WB_API wb_status wb_bench(const wb_config* config, char** out_json);

/* ---- metrics ---- */

/* rate_denominator: "generated", "executed", or NULL for the recorded one. */
WB_API wb_status wb_metrics_compute(const char* const* artifact_dirs, size_t n,
                                    uint64_t seed, const char* rate_denominator,
                                    wb_metrics** out);
WB_API wb_status wb_metrics_load(const char* path, wb_metrics** out);
/* format: "table", "records", "coverage", "json", "text". */
WB_API wb_status wb_report(const wb_metrics* metrics, const char* format,
                           char** out);
WB_API void wb_metrics_free(wb_metrics* metrics);

/* ---- oracle ---- */

/* Writes the benchmark report as JSON. */
WB_API wb_status wb_judge_bench(const wb_config* config, const char* dataset_path,
                                char** out_json);

/* ---- validation ---- */

/* threshold < 0 selects the default. */
WB_API wb_status wb_validator_create(const char* dictionary_path,
                                     const char* embedder_json, double threshold,
                                     wb_validator** out);
/* Validates and, when admit is non-zero and valid, registers the utterance.
   Writes {"valid": bool, "reasons": [...]}. */
WB_API wb_status wb_validator_check(wb_validator* validator, const char* id,
                                    const char* utterance, int admit,
                                    char** out_json);
WB_API void wb_validator_free(wb_validator* validator);

/* ---- generator plugins ----
   generate receives a JSON context {"seed", "history_size", "manual_id",
   "warnings": [{"id", "text", "component"}], "last": record-or-null} and
   writes a JSON test input {"utterance", "target_warning_id"} into *out,
   allocated with malloc. It returns 0 on success. update may be NULL and
   receives {"input": ..., "verdict": ... or null}. */
typedef int (*wb_generate_fn)(const char* context_json, char** out, void* user_data);
typedef void (*wb_update_fn)(const char* event_json, void* user_data);

WB_API wb_status wb_register_generator(const char* name, wb_generate_fn generate,
                                       wb_update_fn update, void* user_data);

#ifdef __cplusplus
}
#endif

#endif
