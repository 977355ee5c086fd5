#ifndef TIMEBIN_H
#define TIMEBIN_H

/* C interface to the time-bin distribution simulator. Handles are opaque;
 * every entry point reports failure through a status code and, when a
 * buffer is supplied, a truncated human-readable message. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tb_status {
  TB_OK = 0,
  TB_ERR_CONFIG = 2,
  TB_ERR_RUNTIME = 3,
  TB_ERR_VALIDATION = 4
} tb_status;

typedef struct tb_config tb_config;
typedef struct tb_report tb_report;

const char* tb_version(void);

/* Configuration ---------------------------------------------------------- */

tb_status tb_config_parse(const char* text, tb_config** out, char* err, size_t err_len);
tb_status tb_config_load(const char* path, tb_config** out, char* err, size_t err_len);

/* Canonical text form of a parsed config; release with tb_string_free. */
tb_status tb_config_canonical(const tb_config* cfg, char** out_text);

void tb_config_free(tb_config* cfg);
void tb_string_free(char* text);

/* Runs -------------------------------------------------------------------- */

typedef struct tb_run_options {
  uint64_t seed;
  uint64_t pulses; /* per scan point, per CHSH setting, or total for a key run */
  int threads;
  int write_events; /* key runs only: also dump the raw event log */
  const char* out_dir;
} tb_run_options;

void tb_run_options_init(tb_run_options* opt);

tb_status tb_run_scan(const tb_config* cfg, const tb_run_options* opt, tb_report** out,
                      char* err, size_t err_len);
tb_status tb_run_chsh(const tb_config* cfg, const tb_run_options* opt, tb_report** out,
                      char* err, size_t err_len);
tb_status tb_run_qkd(const tb_config* cfg, const tb_run_options* opt, tb_report** out,
                     char* err, size_t err_len);

typedef struct tb_budget_inputs {
  double bell_multipair;
  double bell_accidental;
  double bell_misalignment;
  double qkd_accidental_z;
  double qkd_accidental_x;
  double qkd_multipair;
  double qkd_misalignment_x;
} tb_budget_inputs;

void tb_budget_inputs_init(tb_budget_inputs* in);

/* Both `in` and `cfg` may be NULL: nominal fractions and no model section. */
tb_status tb_run_budget(const tb_budget_inputs* in, const tb_config* cfg,
                        const tb_run_options* opt, tb_report** out, char* err, size_t err_len);

/* Runs the internal model checks; TB_ERR_VALIDATION when any fails. A
 * report is produced either way. */
tb_status tb_validate(tb_report** out, char* err, size_t err_len);

/* Reports ------------------------------------------------------------------ */

size_t tb_report_size(const tb_report* rep);
const char* tb_report_key(const tb_report* rep, size_t index);
const char* tb_report_value(const tb_report* rep, size_t index);

/* 0 when the key exists and parses as a number. */
int tb_report_number(const tb_report* rep, const char* key, double* out);

/* Full rendered text; release with tb_string_free. */
char* tb_report_render(const tb_report* rep);

void tb_report_free(tb_report* rep);

#ifdef __cplusplus
}
#endif

#endif /* TIMEBIN_H */
