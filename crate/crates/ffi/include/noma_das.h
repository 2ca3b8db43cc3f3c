#ifndef NOMA_DAS_H
#define NOMA_DAS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NomaScheme {
  NOMA_SCHEME_NOMA_SINGLE_SELECTION = 0,
  NOMA_SCHEME_NOMA_BLANKET = 1,
  NOMA_SCHEME_CONVENTIONAL_NOMA = 2,
  NOMA_SCHEME_CONVENTIONAL_SINGLE_SELECTION = 3,
  NOMA_SCHEME_JT_NOMA = 4,
} NomaScheme;

/**
 * Result code of every fallible call.
 */
typedef enum NomaStatus {
  NOMA_STATUS_OK = 0,
  NOMA_STATUS_NULL_POINTER = 1,
  NOMA_STATUS_INVALID_ARGUMENT = 2,
  NOMA_STATUS_DOMAIN = 3,
  NOMA_STATUS_DIVERGENCE = 4,
  NOMA_STATUS_CONFIG = 5,
  NOMA_STATUS_IO = 6,
  NOMA_STATUS_INTERNAL = 7,
  NOMA_STATUS_PANIC = 8,
} NomaStatus;

typedef struct NomaChannel NomaChannel;

typedef struct NomaExperiment NomaExperiment;

typedef struct NomaGeometry NomaGeometry;

typedef struct NomaResults NomaResults;

/**
 * Outcome of an allocator. `p1` and `p2` are NaN in outage; `beta` is
 * NaN for center-NOMA schemes.
 */
typedef struct NomaAllocation {
  double p1;
  double p2;
  double objective;
  bool outage;
  size_t iterations;
  double residual;
  double beta;
} NomaAllocation;

/**
 * Numeric part of one result row; the scheme label is read with
 * [`noma_results_scheme`].
 */
typedef struct NomaRow {
  double sweep_value;
  double metric_mean;
  double metric_stderr;
  double outage_rate;
  size_t trials;
} NomaRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *noma_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *noma_version(void);

/**
 * Generalized exponential integral `E_n(x)`.
 */
enum NomaStatus noma_exp_integral(uint32_t n, double x, double *out);

/**
 * `C_t(x)` in bits/s/Hz.
 */
enum NomaStatus noma_ergodic_capacity(uint32_t t, double x, double *out);

/**
 * The default layout: six RRUs on a ring of radius 2/3, path-loss exponent 4.
 */
enum NomaStatus noma_geometry_default(struct NomaGeometry **out);

/**
 * Custom layout from six `(x, y)` pairs (12 doubles).
 */
enum NomaStatus noma_geometry_new(const double *rru_xy, double alpha, struct NomaGeometry **out);

void noma_geometry_free(struct NomaGeometry *geometry);

/**
 * Draws a Rayleigh realization for users at `(x1, y1)` (user 1) and
 * `(x2, y2)` (user 2) from the ChaCha8 stream `(seed, stream)`.
 */
enum NomaStatus noma_channel_sample(const struct NomaGeometry *geometry,
                                    double x1,
                                    double y1,
                                    double x2,
                                    double y2,
                                    uint64_t seed,
                                    uint64_t stream,
                                    struct NomaChannel **out);

/**
 * Channel from slow fading and fast-fading power, each 7x2 row-major
 * (transmitter-major, user 1 then user 2; transmitter 0 is the center BS).
 */
enum NomaStatus noma_channel_from_gains(const double *slow,
                                        const double *fading_power,
                                        struct NomaChannel **out);

/**
 * Instantaneous power gain `|h_{tx,user}|^2`; `tx` in 0..=6, `user` 1 or 2.
 */
enum NomaStatus noma_channel_gain(const struct NomaChannel *channel,
                                  size_t tx,
                                  uint32_t user,
                                  double *out);

void noma_channel_free(struct NomaChannel *channel);

/**
 * Max-min allocation with instantaneous CGI.
 */
enum NomaStatus noma_maxmin_cgi(const struct NomaChannel *channel,
                                enum NomaScheme scheme,
                                double total_power,
                                double center_fraction,
                                double noise_var,
                                struct NomaAllocation *out);

/**
 * Max-min allocation of the closed-form upper bound with only the slow
 * fading known. `epsilon` is the absolute bisection width.
 */
enum NomaStatus noma_maxmin_cdi(const struct NomaChannel *channel,
                                enum NomaScheme scheme,
                                double total_power,
                                double center_fraction,
                                double noise_var,
                                double epsilon,
                                struct NomaAllocation *out);

/**
 * Max-sum-rate allocation under `min(R_1, R_2) >= rt` with instantaneous CGI.
 */
enum NomaStatus noma_maxsum_cgi(const struct NomaChannel *channel,
                                enum NomaScheme scheme,
                                double total_power,
                                double center_fraction,
                                double noise_var,
                                double rt,
                                struct NomaAllocation *out);

/**
 * A preset experiment: `"fig2"` ... `"fig6"`.
 */
enum NomaStatus noma_experiment_preset(const char *name, struct NomaExperiment **out);

enum NomaStatus noma_experiment_set_trials(struct NomaExperiment *experiment, size_t trials);

enum NomaStatus noma_experiment_set_seed(struct NomaExperiment *experiment, uint64_t seed);

/**
 * Runs the experiment on the global thread pool.
 */
enum NomaStatus noma_experiment_run(const struct NomaExperiment *experiment,
                                    struct NomaResults **out);

void noma_experiment_free(struct NomaExperiment *experiment);

/**
 * Number of rows; 0 for a null handle.
 */
size_t noma_results_len(const struct NomaResults *results);

enum NomaStatus noma_results_get(const struct NomaResults *results,
                                 size_t index,
                                 struct NomaRow *out);

/**
 * Scheme label of row `index`, owned by `results`; null when out of range.
 */
const char *noma_results_scheme(const struct NomaResults *results, size_t index);

enum NomaStatus noma_results_write_csv(const struct NomaResults *results, const char *path);

void noma_results_free(struct NomaResults *results);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMA_DAS_H */
