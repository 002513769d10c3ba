/* mcn — co-design of deadbeat tracking controllers and multi-hop TDMA
 * network parameters (link weights, slot schedules) for SISO LTI plants.
 *
 * C interface of the shared library. All objects are opaque handles created
 * and destroyed here; every call returns a status code and never throws.
 * Error detail for the calling thread is available via mcn_last_error().
 */

#ifndef MCN_MCN_H
#define MCN_MCN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcn_status {
    MCN_OK = 0,
    MCN_ERR_INFEASIBLE = 2,   /* a synthesis stage has no solution */
    MCN_ERR_BUDGET = 3,       /* combinatorial enumeration budget exceeded */
    MCN_ERR_CONFIG = 4,       /* malformed configuration or input files */
    MCN_ERR_INVALID_ARG = 5,  /* null handle / bad argument */
    MCN_ERR_INTERNAL = 6      /* numerical failure or unexpected error */
} mcn_status;

typedef struct mcn_config mcn_config;
typedef struct mcn_report mcn_report;

const char* mcn_version(void);

/* Most recent error message on this thread (empty string when none). The
 * pointer stays valid until the next failing call on the same thread. */
const char* mcn_last_error(void);

/* ---- configuration ---- */

mcn_status mcn_config_parse(const char* json_text, mcn_config** out);
mcn_status mcn_config_load(const char* path, mcn_config** out);

/* CLI-flag style override; keys: model, pi-max, rate-sweep (lo:hi:step),
 * horizon, oracle, seed, amplitude. */
mcn_status mcn_config_set(mcn_config* cfg, const char* key, const char* value);

void mcn_config_free(mcn_config* cfg);

/* ---- commands ---- */

mcn_status mcn_run_analyze(const mcn_config* cfg, mcn_report** out);
mcn_status mcn_run_codesign(const mcn_config* cfg, mcn_report** out);
mcn_status mcn_run_schedule_search(const mcn_config* cfg, mcn_report** out);

/* Replay a previously emitted codesign report (solution_path points at its
 * report.json); the configuration must hash-match the one it was built from. */
mcn_status mcn_run_simulate(const mcn_config* cfg, const char* solution_path, mcn_report** out);

/* ---- reports ---- */

/* JSON text of the report; owned by the report handle. */
const char* mcn_report_json(const mcn_report* report);

/* Number of side files (CSV traces, plots, rankings) and access to their
 * names/contents by index; strings owned by the report handle. */
size_t mcn_report_file_count(const mcn_report* report);
const char* mcn_report_file_name(const mcn_report* report, size_t index);
const char* mcn_report_file_contents(const mcn_report* report, size_t index);

/* Write report.json and every side file into out_dir (created if missing). */
mcn_status mcn_report_write(const mcn_report* report, const char* out_dir);

void mcn_report_free(mcn_report* report);

#ifdef __cplusplus
}
#endif

#endif /* MCN_MCN_H */
