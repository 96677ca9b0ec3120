/* C API for the endemic early fake-tweet detection pipeline.
 *
 * The library is driven through an opaque session: load a config file (or
 * start from defaults), layer key=value overrides on top, then run pipeline
 * commands. Every function returns a status code; the session keeps the
 * message of the last failure.
 */
#ifndef ENDEMIC_H
#define ENDEMIC_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  ENDEMIC_OK = 0,
  ENDEMIC_ERR_RUNTIME = 1, /* command started but failed */
  ENDEMIC_ERR_USAGE = 2    /* bad command, config or missing input */
} endemic_status;

typedef struct endemic_session endemic_session;

/* Session with built-in default configuration. Never returns NULL except on
 * allocation failure. */
endemic_session* endemic_session_create(void);
void endemic_session_destroy(endemic_session* s);

/* Replaces the session configuration with the file contents (flat dotted
 * "key = value" lines) on top of the defaults. */
endemic_status endemic_load_config(endemic_session* s, const char* path);

/* Sets one override; overrides win over file values and are recorded in the
 * run manifest. */
endemic_status endemic_set(endemic_session* s, const char* key,
                           const char* value);

/* Current value of a config key, or NULL when unset. The pointer stays
 * valid until the next call on the session. */
const char* endemic_get(endemic_session* s, const char* key);

/* Runs one pipeline command: ingest, weak-label, make-splits, build-graph,
 * embed-graph, fetch-evidence, train, eval or report. */
endemic_status endemic_run(endemic_session* s, const char* command);

/* Human-readable message of the last run or failure (empty string when none).
 * Valid until the next call on the session. */
const char* endemic_last_message(const endemic_session* s);

/* Path of the manifest written by the last successful run, or empty. */
const char* endemic_last_manifest(const endemic_session* s);

const char* endemic_version(void);

#ifdef __cplusplus
}
#endif

#endif /* ENDEMIC_H */
