#ifndef CF_SYNTH_H
#define CF_SYNTH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_ARGUMENT = 1,
  CF_STATUS_INVALID_UTF8 = 2,
  CF_STATUS_INVALID_TASK = 3,
  CF_STATUS_INVALID_CONFIG = 4,
  CF_STATUS_INVALID_RULE = 5,
  CF_STATUS_NO_OBSERVED_EXAMPLES = 6,
  CF_STATUS_INDEX_OUT_OF_RANGE = 7,
  CF_STATUS_PANIC = 8,
} CfStatus;

/**
 * A configured learner.
 */
typedef struct CfEngine CfEngine;

/**
 * Ranked suggestions from one learn call.
 */
typedef struct CfResult CfResult;

/**
 * A column with its observed examples.
 */
typedef struct CfTask CfTask;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on this thread.
 */
const char *cf_last_error(void);

/**
 * Library version as a static string.
 */
const char *cf_version(void);

/**
 * Creates an engine from TOML configuration text; null means defaults.
 *
 * # Safety
 * `config_toml` is null or a nul-terminated string; `out` is a valid pointer.
 */
enum CfStatus cf_engine_new(const char *config_toml, struct CfEngine **out);

/**
 * # Safety
 * `engine` is null or a handle from [`cf_engine_new`] not yet freed.
 */
void cf_engine_free(struct CfEngine *engine);

/**
 * Parses a task in the task JSON schema.
 *
 * # Safety
 * `json` is a nul-terminated string; `out` is a valid pointer.
 */
enum CfStatus cf_task_from_json(const char *json, struct CfTask **out);

/**
 * Number of cells in the task's column.
 *
 * # Safety
 * `task` is null or a live task handle.
 */
size_t cf_task_len(const struct CfTask *task);

/**
 * # Safety
 * `task` is null or a handle from [`cf_task_from_json`] not yet freed.
 */
void cf_task_free(struct CfTask *task);

/**
 * Learns ranked rules for `task`.
 *
 * # Safety
 * `engine` and `task` are live handles; `out` is a valid pointer.
 */
enum CfStatus cf_engine_learn(const struct CfEngine *engine,
                              const struct CfTask *task,
                              struct CfResult **out);

/**
 * Number of suggestions; 0 for a null handle.
 *
 * # Safety
 * `result` is null or a live result handle.
 */
size_t cf_result_count(const struct CfResult *result);

/**
 * Rule text of suggestion `index`, borrowed from `result`.
 *
 * # Safety
 * `result` is a live result handle; `out` is a valid pointer.
 */
enum CfStatus cf_result_rule_text(const struct CfResult *result, size_t index, const char **out);

/**
 * Score of suggestion `index`.
 *
 * # Safety
 * `result` is a live result handle; `out` is a valid pointer.
 */
enum CfStatus cf_result_score(const struct CfResult *result, size_t index, double *out);

/**
 * Per-cell formats of suggestion `index`, borrowed from `result`.
 *
 * # Safety
 * `result` is a live result handle; `data` and `len` are valid pointers.
 */
enum CfStatus cf_result_formats(const struct CfResult *result,
                                size_t index,
                                const uint32_t **data,
                                size_t *len);

/**
 * The whole result as JSON, in the service's suggest response schema.
 *
 * # Safety
 * `result` is a live result handle; `out` is a valid pointer.
 */
enum CfStatus cf_result_to_json(const struct CfResult *result, char **out);

/**
 * # Safety
 * `result` is null or a handle from [`cf_engine_learn`] not yet freed.
 */
void cf_result_free(struct CfResult *result);

/**
 * Simplest rule found that formats the task's column like `rule_text`.
 *
 * # Safety
 * `engine` and `task` are live handles, `rule_text` is a nul-terminated
 * string and `out` is a valid pointer.
 */
enum CfStatus cf_engine_simplify(const struct CfEngine *engine,
                                 const struct CfTask *task,
                                 const char *rule_text,
                                 char **out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` is null or a string returned through an owned out pointer, not yet freed.
 */
void cf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CF_SYNTH_H */
