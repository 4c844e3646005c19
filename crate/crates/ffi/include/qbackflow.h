#ifndef QBACKFLOW_H
#define QBACKFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QbStatus {
  QB_STATUS_OK = 0,
  QB_STATUS_NULL_POINTER = 1,
  QB_STATUS_INVALID_ARGUMENT = 2,
  QB_STATUS_DIMENSION = 3,
  QB_STATUS_NOT_HERMITIAN = 4,
  QB_STATUS_NOT_CPTP = 5,
  QB_STATUS_POSTSELECTION_IMPOSSIBLE = 6,
  QB_STATUS_UNVALIDATED = 7,
  QB_STATUS_PANIC = 8,
} QbStatus;

typedef enum QbMode {
  QB_MODE_BARE = 0,
  QB_MODE_PATH = 1,
  QB_MODE_SWITCH = 2,
} QbMode;

typedef enum QbOutcome {
  QB_OUTCOME_PLUS = 0,
  QB_OUTCOME_MINUS = 1,
} QbOutcome;

/**
 * A validated Kraus channel on one qubit.
 */
typedef struct QbChannel QbChannel;

/**
 * A coherent-control configuration.
 */
typedef struct QbControl QbControl;

/**
 * Result of backflow detection on a time grid.
 */
typedef struct QbReport QbReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *qb_status_message(enum QbStatus status);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *qb_last_error_message(void);

/**
 * Builds the Kraus form of `φ_t`.
 */
enum QbStatus qb_channel_phi_t(double t, struct QbChannel **out);

void qb_channel_free(struct QbChannel *channel);

/**
 * Number of Kraus operators; 0 for a null handle.
 */
size_t qb_channel_len(const struct QbChannel *channel);

/**
 * Completeness residual, smallest Choi eigenvalue and overall pass flag.
 */
enum QbStatus qb_channel_validate(const struct QbChannel *channel,
                                  double *completeness_residual,
                                  double *choi_min_eigenvalue,
                                  bool *passes);

/**
 * Applies the channel to a qubit density matrix (8 doubles in, 8 out).
 */
enum QbStatus qb_channel_apply(const struct QbChannel *channel,
                               const double *rho_in,
                               double *rho_out);

/**
 * Control configuration with purity `p` and post-selected `outcome`.
 * Path control starts with balanced flip amplitudes.
 */
enum QbStatus qb_control_new(enum QbMode mode,
                             double p,
                             enum QbOutcome outcome,
                             struct QbControl **out);

/**
 * Replaces the path amplitudes. `alpha` and `beta` hold interleaved
 * (re, im) pairs; `alpha` is indexed by the second channel's Kraus index,
 * `beta` by the first's. Fails on a switch configuration.
 */
enum QbStatus qb_control_set_amplitudes(struct QbControl *control,
                                        const double *alpha,
                                        size_t alpha_len,
                                        const double *beta,
                                        size_t beta_len);

void qb_control_free(struct QbControl *control);

/**
 * Post-selected output of the controlled pair of channel copies `e`, `f`
 * acting on `rho_in`.
 */
enum QbStatus qb_control_output(const struct QbControl *control,
                                const struct QbChannel *e,
                                const struct QbChannel *f,
                                const double *rho_in,
                                double *rho_out,
                                double *probability);

/**
 * Detects backflow for the probe pair `|0⟩`, `a|0⟩ + √(1−a²)|1⟩` on a
 * logarithmic grid of `points` samples over `[t_min, t_max]`. `p` is
 * ignored in bare mode.
 */
enum QbStatus qb_detect(enum QbMode mode,
                        double a,
                        double p,
                        double t_min,
                        double t_max,
                        size_t points,
                        double eps,
                        struct QbReport **out);

void qb_report_free(struct QbReport *report);

/**
 * Some derivative sample exceeds `eps`. False for a null handle.
 */
bool qb_report_verdict(const struct QbReport *report);

/**
 * Backflow still under way at the last significant derivative sample.
 */
bool qb_report_persists(const struct QbReport *report);

/**
 * Number of time samples; 0 for a null handle.
 */
size_t qb_report_len(const struct QbReport *report);

/**
 * Copies the sample times, distances and derivatives into caller buffers
 * of `len` doubles each. `len` must equal [`qb_report_len`]; any buffer may
 * be null to skip it.
 */
enum QbStatus qb_report_series(const struct QbReport *report,
                               size_t len,
                               double *times,
                               double *distance,
                               double *derivative);

size_t qb_report_interval_count(const struct QbReport *report);

enum QbStatus qb_report_interval(const struct QbReport *report,
                                 size_t index,
                                 double *t_start,
                                 double *t_end);

/**
 * Trace distance of two qubit density matrices.
 */
enum QbStatus qb_trace_distance(const double *rho1, const double *rho2, double *out);

/**
 * Closed-form probe-pair distance after the bare channel.
 */
double qb_bare_distance(double a, double t);

/**
 * Closed-form `dD/dt` of the probe pair. `p` is ignored in bare mode.
 */
enum QbStatus qb_ddt(enum QbMode mode, double a, double p, double t, double *out);

/**
 * Long-time critical `a` for path or switch control.
 */
enum QbStatus qb_threshold(enum QbMode mode, double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBACKFLOW_H */
