/* burngail — driving-style imitation learning on an oval track.
 *
 * C interface to the library: configuration handles plus the four pipeline
 * operations (demonstration generation, adversarial training, evaluation,
 * artifact export). All functions are safe to call from any single thread;
 * distinct threads may use distinct handles concurrently.
 *
 * Conventions:
 *   - Operations return bg_status; anything but BG_OK leaves a description in
 *     bg_last_error() (thread-local, valid until the next call on the thread).
 *   - Strings returned through char** are heap-allocated UTF-8; release them
 *     with bg_string_free(). Output parameters may be NULL when the caller
 *     does not need the value.
 */
#ifndef BURNGAIL_H
#define BURNGAIL_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bg_status {
  BG_OK = 0,
  BG_CONFIG_ERROR = 2, /* bad settings, unknown keys, missing inputs */
  BG_RUNTIME_ERROR = 3 /* faults while running: I/O, divergence, broken data */
} bg_status;

/* Library version, e.g. "0.1.0". Static storage; do not free. */
const char* bg_version(void);

/* Last error message recorded on this thread, or "" when none. */
const char* bg_last_error(void);

void bg_string_free(char* s);

/* ------------------------------------------------------------------------ */
/* Configuration handle. Starts from built-in defaults; layer a JSON file    */
/* and/or individual dotted-key overrides on top, then validate.             */

typedef struct bg_config bg_config;

bg_config* bg_config_create(void);
void bg_config_free(bg_config* cfg);

/* Applies a JSON config file over the current values. Unknown keys fail. */
bg_status bg_config_load_file(bg_config* cfg, const char* path);

/* Sets one dotted key, e.g. ("trainer.lambda", "500") or
 * ("trainer.algorithm", "gail"). The value is parsed as JSON; bare words are
 * taken as strings. */
bg_status bg_config_set(bg_config* cfg, const char* dotted_key, const char* value);

bg_status bg_config_validate(const bg_config* cfg);

/* Full resolved configuration as pretty-printed JSON. */
bg_status bg_config_resolved(const bg_config* cfg, char** json_out);

/* ------------------------------------------------------------------------ */
/* Pipeline operations. Each validates the config, writes the resolved       */
/* config into the run directory, and reports a JSON summary of what it      */
/* produced (paths, counts, headline metrics) through summary_json.          */

/* Generates the expert demonstration dataset into <run_dir>/dataset/.
 * Refuses to overwrite an existing dataset unless force is nonzero. */
bg_status bg_gen_demos(const bg_config* cfg, int force, char** summary_json);

/* Trains from <run_dir>/dataset/, resuming from the latest checkpoint when
 * one exists. Writes metrics.csv and checkpoints under the run directory. */
bg_status bg_train(const bg_config* cfg, char** summary_json);

/* Evaluates a checkpoint (NULL or "" = latest in <run_dir>/checkpoints)
 * against the validation split: rmse.csv, events.csv, ami.csv. */
bg_status bg_eval(const bg_config* cfg, const char* checkpoint, char** summary_json);

/* Exports plotting artifacts for a checkpoint: trajectories.jsonl (forced
 * style codes, 10 trials each) and embedding.csv (the 4x16 style matrix). */
bg_status bg_export(const bg_config* cfg, const char* checkpoint, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* BURNGAIL_H */
