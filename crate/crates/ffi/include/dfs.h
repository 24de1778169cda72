/* Copyright 2026 The dfs Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef DFS_H
#define DFS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum DfsStatus {
  DFS_STATUS_OK = 0,
  DFS_STATUS_NULL_POINTER = 1,
  DFS_STATUS_INVALID_ARGUMENT = 2,
  DFS_STATUS_INVALID_MODEL = 3,
  DFS_STATUS_PARSE = 4,
  DFS_STATUS_NUMERICAL = 5,
  DFS_STATUS_OUT_OF_RANGE = 6,
  DFS_STATUS_PANIC = 7,
} DfsStatus;

/**
 * Trajectory columns, in the order of the CSV header.
 */
typedef enum DfsColumn {
  DFS_COLUMN_T = 0,
  DFS_COLUMN_RE_U,
  DFS_COLUMN_IM_U,
  DFS_COLUMN_ABS_U,
  DFS_COLUMN_V,
  DFS_COLUMN_V_PLUS_U2,
  DFS_COLUMN_EPS_TILDE,
  DFS_COLUMN_GAMMA,
  DFS_COLUMN_GAMMA_TILDE,
  DFS_COLUMN_KAPPA,
  DFS_COLUMN_KAPPA_TILDE,
  DFS_COLUMN_RHO_VV,
  DFS_COLUMN_RHO_PP,
  DFS_COLUMN_RE_RHO_PM,
  DFS_COLUMN_IM_RHO_PM,
  DFS_COLUMN_RHO_MM,
  DFS_COLUMN_RHO_DD,
  DFS_COLUMN_PURITY,
} DfsColumn;

/**
 * Opaque spectral model.
 */
typedef struct DfsModel DfsModel;

/**
 * Opaque simulation report.
 */
typedef struct DfsReport DfsReport;

/**
 * Opaque scenario configuration.
 */
typedef struct DfsScenario DfsScenario;

typedef struct DfsSpectrum {
  double eigenvalues[6];
  bool physical[6];
  bool defective;
  size_t eigenvector_dim;
} DfsSpectrum;

/**
 * Stabilization verdict. States are indexed 0 = |v>, 1 = |+>, 2 = |->, 3 = |d>.
 */
typedef struct DfsVerdict {
  /**
   * 0 none, 1 v->0, 2 v->1, 3 v+|u|^2->0, 4 v+|u|^2->1.
   */
  int32_t condition;
  /**
   * Predicted state, or -1.
   */
  int32_t predicted;
  /**
   * NaN without a prediction.
   */
  double fidelity;
  double purity;
} DfsVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *dfs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dfs_version(void);

/**
 * Lorentzian reservoir.
 *
 * # Safety
 * `out_model` must be a valid pointer.
 */
enum DfsStatus dfs_model_lorentzian(double gamma,
                                    double bandwidth,
                                    double eps0,
                                    double mu,
                                    double temperature,
                                    struct DfsModel **out_model);

/**
 * Wide-band (flat) reservoir.
 *
 * # Safety
 * `out_model` must be a valid pointer.
 */
enum DfsStatus dfs_model_wide_band(double gamma,
                                   double eps0,
                                   double mu,
                                   double temperature,
                                   struct DfsModel **out_model);

/**
 * # Safety
 * `model` must come from a `dfs_model_*` constructor and not be used after.
 */
void dfs_model_free(struct DfsModel *model);

/**
 * Spectral density at `omega`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DfsStatus dfs_model_spectral_density(const struct DfsModel *model,
                                          double omega,
                                          double *out_j);

/**
 * Born–Markov rate constants.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DfsStatus dfs_bm_rates(const struct DfsModel *model, double *kappa, double *kappa_tilde);

/**
 * Analytic spectrum of the generator at fixed rates.
 *
 * # Safety
 * `out_spectrum` must be valid.
 */
enum DfsStatus dfs_liouville_spectrum(double kappa,
                                      double kappa_tilde,
                                      struct DfsSpectrum *out_spectrum);

/**
 * Scenario from `key = value` text.
 *
 * # Safety
 * `text` must be NUL-terminated; `out_scenario` must be valid.
 */
enum DfsStatus dfs_scenario_parse(const char *text, struct DfsScenario **out_scenario);

/**
 * Number of scenarios in a named preset.
 *
 * # Safety
 * `name` must be NUL-terminated; `count` must be valid.
 */
enum DfsStatus dfs_preset_count(const char *name, size_t *count);

/**
 * Scenario `index` of a named preset.
 *
 * # Safety
 * `name` must be NUL-terminated; `out_scenario` must be valid.
 */
enum DfsStatus dfs_scenario_preset(const char *name,
                                   size_t index,
                                   struct DfsScenario **out_scenario);

/**
 * Scenario for a model on the default grid.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DfsStatus dfs_scenario_from_model(const struct DfsModel *model,
                                       struct DfsScenario **out_scenario);

/**
 * Replaces the time grid.
 *
 * # Safety
 * `scenario` must be valid.
 */
enum DfsStatus dfs_scenario_set_grid(struct DfsScenario *scenario, double dt, double horizon);

/**
 * Pure basis initial state: 0 = |v>, 1 = |+>, 2 = |->, 3 = |d>.
 *
 * # Safety
 * `scenario` must be valid.
 */
enum DfsStatus dfs_scenario_set_initial(struct DfsScenario *scenario, uint32_t state);

/**
 * `α|+> + β|->` with complex amplitudes, normalised internally.
 *
 * # Safety
 * `scenario` must be valid.
 */
enum DfsStatus dfs_scenario_set_superposition(struct DfsScenario *scenario,
                                              double alpha_re,
                                              double alpha_im,
                                              double beta_re,
                                              double beta_im);

/**
 * # Safety
 * `scenario` must come from a `dfs_scenario_*` constructor and not be used after.
 */
void dfs_scenario_free(struct DfsScenario *scenario);

/**
 * Runs the full pipeline.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DfsStatus dfs_run(const struct DfsScenario *scenario, struct DfsReport **out_report);

/**
 * # Safety
 * `report` must come from [`dfs_run`] and not be used after.
 */
void dfs_report_free(struct DfsReport *report);

/**
 * Number of grid nodes.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DfsStatus dfs_report_len(const struct DfsReport *report, size_t *len);

/**
 * Copies one column into `buf`, which must hold `dfs_report_len` values.
 *
 * # Safety
 * `buf` must point to `cap` writable doubles.
 */
enum DfsStatus dfs_report_column(const struct DfsReport *report,
                                 enum DfsColumn column,
                                 double *buf,
                                 size_t cap);

/**
 * Stabilization verdict of a run.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DfsStatus dfs_report_verdict(const struct DfsReport *report, struct DfsVerdict *verdict);

/**
 * Switch-off classification: 0 κ off, 1 κ̃ off, 2 neither, 3 both, -1 not
 * available. `t_s` is NaN when undefined.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DfsStatus dfs_report_switch_off(const struct DfsReport *report, int32_t *which, double *t_s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DFS_H */
