/*
 * Copyright 2026 The scusim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SCUSIM_SCUSIM_H
#define SCUSIM_SCUSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SCUSIM_API __declspec(dllexport)
#else
#define SCUSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status; on failure scusim_last_error() holds a message
 * for the calling thread. */
typedef enum scusim_status {
  SCUSIM_OK = 0,
  SCUSIM_ERR_CONFIG = 1,
  SCUSIM_ERR_INVALID_ARGUMENT = 2,
  SCUSIM_ERR_ADDRESS_FAULT = 3,
  SCUSIM_ERR_DECODE_FAULT = 4,
  SCUSIM_ERR_ILLEGAL_INSTR = 5,
  SCUSIM_ERR_UNLOCK_NOT_OWNER = 6,
  SCUSIM_ERR_UNSUPPORTED_TEAM = 7,
  SCUSIM_ERR_NOT_REACHED = 8,
  SCUSIM_ERR_MALFORMED_TRACE = 9,
  SCUSIM_ERR_DEADLOCK = 10,
  SCUSIM_ERR_PARSE = 11,
  SCUSIM_ERR_IO = 12,
  SCUSIM_ERR_INTERNAL = 99
} scusim_status;

typedef enum scusim_run_status {
  SCUSIM_RUN_HALTED = 0,
  SCUSIM_RUN_CYCLE_LIMIT = 1,
  SCUSIM_RUN_DEADLOCK = 2
} scusim_run_status;

typedef struct scusim_config scusim_config;
typedef struct scusim_cluster scusim_cluster;

SCUSIM_API const char* scusim_version(void);
SCUSIM_API const char* scusim_status_name(scusim_status status);
SCUSIM_API const char* scusim_last_error(void);

/* Strings returned through char** belong to the caller. */
SCUSIM_API void scusim_string_free(char* s);

/* ---- configuration ---- */

SCUSIM_API scusim_status scusim_config_new(scusim_config** out);
SCUSIM_API scusim_status scusim_config_from_json(const char* json, scusim_config** out);
SCUSIM_API scusim_status scusim_config_load(const char* path, scusim_config** out);
SCUSIM_API void scusim_config_free(scusim_config* cfg);

/* key=value override using the config file names, e.g. "n_cores", "8" or
 * "power.core.active", "5.0". Validation happens on use. */
SCUSIM_API scusim_status scusim_config_set(scusim_config* cfg, const char* key,
                                           const char* value);
SCUSIM_API scusim_status scusim_config_load_calibration(scusim_config* cfg, const char* path);
SCUSIM_API scusim_status scusim_config_validate(const scusim_config* cfg);
SCUSIM_API scusim_status scusim_config_to_json(const scusim_config* cfg, char** out);
SCUSIM_API scusim_status scusim_config_register_table(const scusim_config* cfg, char** out);

/* ---- cluster ---- */

SCUSIM_API scusim_status scusim_cluster_new(const scusim_config* cfg, scusim_cluster** out);
SCUSIM_API void scusim_cluster_free(scusim_cluster* cl);
SCUSIM_API scusim_status scusim_cluster_n_cores(const scusim_cluster* cl, unsigned* out);

/* Program text in listing syntax (labels, .sync_begin/.sync_end markers). */
SCUSIM_API scusim_status scusim_cluster_load_program(scusim_cluster* cl, unsigned core,
                                                     const char* assembly);
SCUSIM_API scusim_status scusim_cluster_set_register(scusim_cluster* cl, unsigned core,
                                                     unsigned reg, uint32_t value);
SCUSIM_API scusim_status scusim_cluster_read_word(const scusim_cluster* cl, uint32_t address,
                                                  uint32_t* out);
SCUSIM_API scusim_status scusim_cluster_write_word(scusim_cluster* cl, uint32_t address,
                                                   uint32_t value);
SCUSIM_API scusim_status scusim_cluster_raise_event(scusim_cluster* cl, uint64_t cycle,
                                                    unsigned core, unsigned line);
SCUSIM_API scusim_status scusim_cluster_step(scusim_cluster* cl);
SCUSIM_API scusim_status scusim_cluster_run(scusim_cluster* cl, uint64_t max_cycles,
                                            scusim_run_status* out);
SCUSIM_API scusim_status scusim_cluster_cycle(const scusim_cluster* cl, uint64_t* out);

/* Run report (JSON); with use_window the measurement markers bound it. */
SCUSIM_API scusim_status scusim_cluster_report_json(const scusim_cluster* cl, int use_window,
                                                    char** out);
SCUSIM_API scusim_status scusim_cluster_periods_csv(const scusim_cluster* cl, char** out);

/* ---- experiments ---- */

typedef struct scusim_cost {
  double cycles;
  double energy_nj;
  double raw_cycles;
  double raw_energy_nj;
  double ideal_cycles;
  double ideal_energy_nj;
} scusim_cost;

/* variant: "scu-barrier", "tas-crit5", "sw-crit10", ... */
SCUSIM_API scusim_status scusim_primitive_cost(const scusim_config* cfg, const char* variant,
                                               unsigned n_cores, scusim_cost* out);

/* Table 1 rows as CSV. With reference_path the deltas to the reference
 * cells are included. */
SCUSIM_API scusim_status scusim_table1_csv(const scusim_config* cfg, const unsigned* cores,
                                           size_t n_cores, const char* reference_path,
                                           char** out);

SCUSIM_API scusim_status scusim_sweep_csv(const scusim_config* cfg, const char* variant,
                                          const unsigned* cores, size_t n_cores,
                                          const uint32_t* sfr, size_t n_sfr, double beta,
                                          uint64_t seed, char** out);

typedef struct scusim_min_sfr {
  uint32_t min_sfr;
  uint32_t below;
  uint32_t above;
  double overhead_below;
  double overhead_at;
  unsigned evaluations;
} scusim_min_sfr;

/* metric: "cycles" or "energy" */
SCUSIM_API scusim_status scusim_min_sfr_solve(const scusim_config* cfg, const char* variant,
                                              unsigned n_cores, double threshold,
                                              const char* metric, scusim_min_sfr* out);

typedef struct scusim_calibration {
  double rms_rel;
  double max_abs_rel;
  int ill_conditioned;
} scusim_calibration;

/* Fits the power parameters to the energy cells of the reference file and
 * returns the calibration file text and a per-cell residual CSV. */
SCUSIM_API scusim_status scusim_calibrate(const scusim_config* cfg, const char* reference_path,
                                          char** calibration_text, char** residuals_csv,
                                          scusim_calibration* summary);

/* Barrier kernel with per-core imbalance; family: "sw", "tas" or "scu".
 * periods_csv may be NULL. */
SCUSIM_API scusim_status scusim_imbalance_run(const scusim_config* cfg, const char* family,
                                              unsigned n_cores, uint32_t sfr, double beta,
                                              uint64_t seed, unsigned iterations,
                                              char** report_json, char** periods_csv);

/* Merges run report JSON documents into one CSV table. */
SCUSIM_API scusim_status scusim_reports_csv(const char* const* report_json, size_t n,
                                            char** out);

#ifdef __cplusplus
}
#endif

#endif
