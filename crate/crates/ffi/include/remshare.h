#ifndef REMSHARE_H
#define REMSHARE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RemsGoal {
  REMS_GOAL_SUM_POWER = 0,
  REMS_GOAL_MAX_MIN = 1,
  REMS_GOAL_LOG_SUM = 2,
} RemsGoal;

typedef enum RemsNetwork {
  REMS_NETWORK_OUTDOOR = 0,
  REMS_NETWORK_INDOOR = 1,
} RemsNetwork;

typedef enum RemsRateMode {
  // CQI-quantised efficiency per RB.
  REMS_RATE_MODE_CQI = 0,
  // Shannon capacity per RB.
  REMS_RATE_MODE_SHANNON = 1,
} RemsRateMode;

// Result code of every fallible call.
typedef enum RemsStatus {
  REMS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  REMS_STATUS_NULL_POINTER = 1,
  // A string argument was not UTF-8.
  REMS_STATUS_INVALID_UTF8 = 2,
  // Configuration or input could not be parsed or failed validation.
  REMS_STATUS_CONFIG = 3,
  // The interference caps admit no allocation.
  REMS_STATUS_INFEASIBLE = 4,
  // A numerical solver did not converge.
  REMS_STATUS_SOLVER = 5,
  // Any other failure while running.
  REMS_STATUS_RUNTIME = 6,
  // A panic was caught at the boundary.
  REMS_STATUS_PANIC = 7,
} RemsStatus;

// Opaque simulation configuration.
typedef struct RemsConfig RemsConfig;

// Opaque campaign result.
typedef struct RemsSummary RemsSummary;

// Per-network statistics of a campaign.
typedef struct RemsNetworkStats {
  double mean_rate_bps;
  // Half-width of the 95% confidence interval over iteration means.
  double ci95_bps;
  // 10th percentile of the pooled per-UE mean rates.
  double p10_rate_bps;
  size_t n_ues;
} RemsNetworkStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread; do not free.
const char *rems_last_error(void);

// Library version as a static string; do not free.
const char *rems_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` is NULL or was returned through a `char **` out-parameter of this
// library and not freed before.
void rems_string_free(char *s);

// The built-in reference configuration.
struct RemsConfig *rems_config_default(void);

// Parses a TOML document; `*out` receives a new handle on success.
//
// # Safety
// `text` is a NUL-terminated string and `out` is writable.
enum RemsStatus rems_config_from_toml(const char *text, struct RemsConfig **out);

// Applies one dotted `key=value` assignment, e.g. `campaign.iterations=20`.
// The configuration is unchanged when the result does not validate.
//
// # Safety
// `config` is a live handle and `assignment` a NUL-terminated string.
enum RemsStatus rems_config_set(struct RemsConfig *config, const char *assignment);

// The resolved configuration as TOML.
//
// # Safety
// `config` is a live handle and `out` is writable.
enum RemsStatus rems_config_to_toml(const struct RemsConfig *config, char **out);

// Hex SHA-256 of the resolved configuration.
//
// # Safety
// `config` is a live handle and `out` is writable.
enum RemsStatus rems_config_hash(const struct RemsConfig *config, char **out);

// # Safety
// `config` is NULL or a handle not freed before.
void rems_config_free(struct RemsConfig *config);

// Runs a full Monte Carlo campaign; `*out` receives a new summary handle.
//
// # Safety
// `config` is a live handle and `out` is writable.
enum RemsStatus rems_run_campaign(const struct RemsConfig *config, struct RemsSummary **out);

// # Safety
// `summary` is a live handle and `out` is writable.
enum RemsStatus rems_summary_network(const struct RemsSummary *summary,
                                     enum RemsNetwork network,
                                     struct RemsNetworkStats *out);

// Time-averaged mean indoor BS transmit power, mW.
//
// # Safety
// `summary` is a live handle and `out` is writable.
enum RemsStatus rems_summary_indoor_power_mw(const struct RemsSummary *summary, double *out);

// The full summary, per-UE samples included, as JSON.
//
// # Safety
// `summary` is a live handle and `out` is writable.
enum RemsStatus rems_summary_to_json(const struct RemsSummary *summary, char **out);

// # Safety
// `summary` is NULL or a handle not freed before.
void rems_summary_free(struct RemsSummary *summary);

// Indoor powers maximising `goal` subject to `W p <= i_max` and
// `0 <= p <= p_max`. `w` is row-major with `n_points` rows of `n_bs`
// gains; `p_out` receives `n_bs` powers in mW and `objective_out`, when not
// NULL, the goal value.
//
// # Safety
// `w` holds `n_points * n_bs` doubles, `i_max` holds `n_points`, `p_out`
// has room for `n_bs`.
enum RemsStatus rems_solve_power(const double *w,
                                 size_t n_points,
                                 size_t n_bs,
                                 const double *i_max,
                                 double p_max,
                                 enum RemsGoal goal,
                                 double *p_out,
                                 double *objective_out);

// Largest factor on the cross-network interference that keeps the full-band
// rate at `psi_percent` of its value without that interference, in dB.
// Per-RB powers are in mW; `rb_bandwidth_hz` is the RB width; `is_5g`
// non-zero applies the 5G rate factor.
//
// # Safety
// Each of `signal`, `noise`, `i_in`, `i_out` holds `n_rb` doubles and
// `beta_db_out` is writable.
enum RemsStatus rems_solve_beta(const double *signal,
                                const double *noise,
                                const double *i_in,
                                const double *i_out,
                                size_t n_rb,
                                double psi_percent,
                                double rb_bandwidth_hz,
                                enum RemsRateMode mode,
                                int is_5g,
                                double *beta_db_out);

// Largest indoor transmit power, dBm, that keeps the received power at a
// protected point `gamma_db` below the thermal noise in `bandwidth_hz`,
// given the pathloss `pl_db` and transmit antenna gain `g_tx_dbi`.
double rems_lsa_max_power_at_point(double gamma_db,
                                   double bandwidth_hz,
                                   double g_tx_dbi,
                                   double pl_db);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REMSHARE_H */
