/* C interface to the editfactory core. Every function returns an ef_status;
 * on failure ef_last_error() holds a message for the calling thread.
 * Strings returned through char** are owned by the caller: release them with
 * ef_free(). Structured results are JSON documents. */
#ifndef EDITFACTORY_EDITFACTORY_H
#define EDITFACTORY_EDITFACTORY_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define EF_API __attribute__((visibility("default")))
#else
#define EF_API
#endif

typedef enum ef_status {
  EF_OK = 0,
  EF_INVALID_ARGUMENT = 1,
  EF_NOT_FOUND = 2,
  EF_IO = 3,
  EF_INVALID_TRANSITION = 4,
  EF_UNDECODABLE_IMAGE = 10,
  EF_ILLEGAL_TAXONOMY = 11,
  EF_IDENTICAL_IMAGES = 12,
  EF_INSUFFICIENT_PAIRS = 13,
  EF_TIMEOUT = 20,
  EF_RATE_LIMITED = 21,
  EF_AUTH_MISSING = 22,
  EF_PROVIDER_ERROR = 23,
  EF_MISSING_SCORE = 30,
  EF_EMPTY_GROUND_TRUTH = 40,
  EF_UNPARSEABLE = 41,
  EF_DIMENSION_MISMATCH = 42,
  EF_SCORE_OUT_OF_RANGE = 43,
  EF_INPUT_OUT_OF_RANGE = 44,
  EF_ILLEGAL_SEVERITY_FOR_CATEGORY = 50,
  EF_TASK_CLOSED = 51,
  EF_DUPLICATE_ANNOTATION = 52,
  EF_HIERARCHY_VIOLATION = 53,
  EF_INCOMPLETE_DATASET = 54,
  EF_IDENTICAL_TEXTS = 60,
  EF_UNKNOWN_DRAFT = 61,
  EF_EMPTY_MODES = 62,
  EF_EMPTY_SEQUENCE = 63,
  EF_NON_POSITIVE_BETA = 64,
  EF_INVALID_LOG_PROB = 65,
  EF_UNREFINED_RECORD = 66,
  EF_EMPTY_DATASET = 70,
  EF_UNAUTHORIZED = 80,
  EF_LEASE_EXPIRED = 81,
  EF_NOT_CLAIMANT = 82,
  EF_INTERNAL = 99
} ef_status;

typedef struct ef_store ef_store;
typedef struct ef_providers ef_providers;
typedef struct ef_server ef_server;

EF_API const char* ef_version(void);
/* "NotFound", "Unparseable", ... */
EF_API const char* ef_status_name(ef_status status);
EF_API const char* ef_last_error(void);
EF_API void ef_free(char* p);

/* ---- handles ------------------------------------------------------------ */

/* fixed_timestamp may be NULL (wall clock) or an ISO-8601 string stamped on
 * every record, for byte-reproducible runs. */
EF_API ef_status ef_store_open(const char* data_dir, const char* fixed_timestamp, ef_store** out);
EF_API void ef_store_close(ef_store* store);

EF_API ef_status ef_providers_load(const char* config_path, ef_providers** out);
EF_API ef_status ef_providers_from_json(const char* config_json, const char* base_dir, ef_providers** out);
EF_API void ef_providers_close(ef_providers* providers);

/* ---- pipeline ----------------------------------------------------------- */

EF_API ef_status ef_ingest(ef_store* store, const char* manifest_path, char** report_json);
/* options: {"n": 400, "targets": {"semantic": 0.5, ...}, "seed": 0, "allow_substitution": false,
 *           "dataset": optional name to record the sample under}.
 * Result: JSON array of pair ids. */
EF_API ef_status ef_sample(ef_store* store, const char* options_json, char** pair_ids_json);
/* options: {"prompt": text, "prompt_file": path, "seed": 0, "dataset": name, "as_model_outputs": false} */
EF_API ef_status ef_synthesize(ef_store* store, ef_providers* providers, const char* generator,
                               const char* options_json, char** report_json);
/* options: {"combiner": "product"|"weighted:w", "threshold": t | "retention": r |
 *           "min_success": s, "max_overedit": o, "apply": true} */
EF_API ef_status ef_filter(ef_store* store, ef_providers* providers, const char* scorer, const char* options_json,
                           char** report_json);
EF_API ef_status ef_gt_load(ef_store* store, const char* jsonl_path, char** report_json);
EF_API ef_status ef_dataset_import(ef_store* store, const char* name, const char* jsonl_path, char** report_json);
/* out_dir may be NULL: <data_dir>/verdicts/<dataset>. */
EF_API ef_status ef_judge(ef_store* store, ef_providers* providers, const char* judge, const char* dataset,
                          const char* out_dir, char** summary_json);
/* kind: "sft" | "dpo". Result: manifest JSON. */
EF_API ef_status ef_export(ef_store* store, const char* kind, const char* out_path, char** manifest_json);
/* kind: "objective" | "human"; format: "md" | "csv" | "json". verdicts_dir may be NULL. */
EF_API ef_status ef_report(ef_store* store, const char* kind, const char* dataset, const char* format,
                           const char* verdicts_dir, char** text);
/* kind: "refine" | "preference" | "human_eval" (the last needs dataset). */
EF_API ef_status ef_tasks_create(ef_store* store, const char* kind, const char* dataset, char** report_json);
EF_API ef_status ef_tasks_list(ef_store* store, const char* kind, char** tasks_json);

/* ---- annotation server -------------------------------------------------- */

/* config: {"bind","port","tokens":{token: annotator},"cors_origin","lease_seconds","verdicts_dir"} */
EF_API ef_status ef_server_create(ef_store* store, const char* config_json, ef_server** out);
EF_API ef_status ef_server_start(ef_server* server, int* port);
EF_API ef_status ef_server_run(ef_server* server);
EF_API void ef_server_stop(ef_server* server);
EF_API void ef_server_destroy(ef_server* server);

/* ---- primitives --------------------------------------------------------- */

/* Exact weighted composite as a decimal string rounded to three places. */
EF_API ef_status ef_composite(const char* accuracy, const char* completeness, const char* clarity, char** weighted);
EF_API ef_status ef_completeness_lookup(double coverage, int all_secondary_covered, double* score);
EF_API ef_status ef_sft_loss(const double* log_probs, size_t n, int sum, double* loss);
EF_API ef_status ef_dpo_loss(const double* policy_chosen, size_t n_pc, const double* policy_rejected, size_t n_pr,
                             const double* ref_chosen, size_t n_rc, const double* ref_rejected, size_t n_rr,
                             double beta, int length_normalized, double* loss);
EF_API ef_status ef_scan_forbidden_terms(const char* instruction, char** hits_json);
/* dimension: "accuracy" | "completeness" | "clarity"; gt_json is a ground-truth record. */
EF_API ef_status ef_render_prompt(const char* dimension, const char* gt_json, const char* instruction,
                                  const char* model_name, char** prompt);
EF_API ef_status ef_parse_verdict(const char* dimension, const char* raw, char** verdict_json);

#ifdef __cplusplus
}
#endif

#endif /* EDITFACTORY_EDITFACTORY_H */
