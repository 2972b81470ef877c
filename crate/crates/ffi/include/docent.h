#ifndef DOCENT_H
#define DOCENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Nonzero codes match the CLI exit codes
// where they overlap.
typedef enum DocentStatus {
  DOCENT_STATUS_OK = 0,
  // Bad plan, script, world or configuration.
  DOCENT_STATUS_VALIDATION = 2,
  // The simulation could not finish, e.g. an unreachable stop.
  DOCENT_STATUS_RUNTIME = 3,
  DOCENT_STATUS_IO = 4,
  // Null pointer or non UTF-8 string argument.
  DOCENT_STATUS_INVALID_ARGUMENT = 5,
  // A Rust panic was caught at the boundary.
  DOCENT_STATUS_PANIC = 6,
} DocentStatus;

typedef enum DocentCondition {
  DOCENT_CONDITION_FULL = 0,
  DOCENT_CONDITION_AUDIO_ONLY = 1,
} DocentCondition;

// Compiled tour plan.
typedef struct DocentPlan DocentPlan;

// Finished (or aborted) simulated tour.
typedef struct DocentRun DocentRun;

// Gallery layout.
typedef struct DocentWorld DocentWorld;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next docent call on the same thread.
const char *docent_last_error(void);

// Library version as a static string.
const char *docent_version(void);

// # Safety
// `s` must come from this library and not be freed twice.
void docent_string_free(char *s);

// Loads a world from a JSON file path or a bundled layout name
// (`tour1`, `tour2`).
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum DocentStatus docent_world_load(const char *spec, struct DocentWorld **out);

// Parses a world from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum DocentStatus docent_world_from_json(const char *json, struct DocentWorld **out);

// Number of exhibits in the world.
//
// # Safety
// `world` must be a live handle or null (returns 0).
size_t docent_world_exhibit_count(const struct DocentWorld *world);

// # Safety
// `world` must come from this library and not be freed twice.
void docent_world_free(struct DocentWorld *world);

// Compiles a tagged script into a plan with the rule backend.
// `config_json` may be null for defaults.
//
// # Safety
// String arguments must be NUL-terminated; `world` must be a live handle;
// `out` must be writable.
enum DocentStatus docent_plan_compile(const char *script,
                                      const char *tour_id,
                                      const struct DocentWorld *world,
                                      const char *config_json,
                                      struct DocentPlan **out);

// Parses and validates a plan from its JSON form.
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
enum DocentStatus docent_plan_from_json(const char *json, struct DocentPlan **out);

// Canonical JSON for the plan. Free with `docent_string_free`.
//
// # Safety
// `plan` must be a live handle; `out` must be writable.
enum DocentStatus docent_plan_to_json(const struct DocentPlan *plan, char **out);

// Number of sentence elements in the plan.
//
// # Safety
// `plan` must be a live handle or null (returns 0).
size_t docent_plan_element_count(const struct DocentPlan *plan);

// # Safety
// `plan` must come from this library and not be freed twice.
void docent_plan_free(struct DocentPlan *plan);

// Runs a plan in the simulated gallery. The registry is surveyed from
// the world with the same seed. When a stop is unreachable the call
// returns `DOCENT_STATUS_RUNTIME` and still stores the partial run in
// `out`, which the caller must free.
//
// # Safety
// Handles must be live; `config_json` is null or NUL-terminated; `out`
// must be writable.
enum DocentStatus docent_run(const struct DocentPlan *plan,
                             const struct DocentWorld *world,
                             enum DocentCondition condition,
                             uint64_t seed,
                             const char *config_json,
                             struct DocentRun **out);

// Simulated tour duration in seconds; 0 for an empty log or null handle.
//
// # Safety
// `run` must be a live handle or null.
double docent_run_duration(const struct DocentRun *run);

// Whether the run stopped before the last element.
//
// # Safety
// `run` must be a live handle or null.
bool docent_run_aborted(const struct DocentRun *run);

// Event log as JSON. Free with `docent_string_free`.
//
// # Safety
// `run` must be a live handle; `out` must be writable.
enum DocentStatus docent_run_events_json(const struct DocentRun *run, char **out);

// Gaze trace as CSV (`t,u,v,on_wall`). Free with `docent_string_free`.
//
// # Safety
// `run` must be a live handle; `out` must be writable.
enum DocentStatus docent_run_gaze_csv(const struct DocentRun *run, char **out);

// Per-exhibit gaze metrics (TFF, TFD, AFD, R-TFD) as JSON. Free with
// `docent_string_free`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum DocentStatus docent_run_metrics_json(const struct DocentRun *run,
                                          const struct DocentWorld *world,
                                          char **out);

// Runs a plan and writes the full run directory (event log, gaze trace,
// plans, world and manifest) to `out_dir`, like `docent run`.
//
// # Safety
// Handles must be live; strings are null (config only) or NUL-terminated.
enum DocentStatus docent_run_to_dir(const struct DocentPlan *plan,
                                    const struct DocentWorld *world,
                                    enum DocentCondition condition,
                                    uint64_t seed,
                                    const char *config_json,
                                    const char *out_dir);

// # Safety
// `run` must come from this library and not be freed twice.
void docent_run_free(struct DocentRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOCENT_H */
