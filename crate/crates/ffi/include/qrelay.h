#ifndef QRELAY_H
#define QRELAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QrStatus {
  QR_STATUS_OK = 0,
  QR_STATUS_NULL_POINTER = 1,
  QR_STATUS_INVALID_ARGUMENT = 2,
  QR_STATUS_NOT_CONVERGED = 3,
  QR_STATUS_BUFFER_TOO_SMALL = 4,
  QR_STATUS_INTERNAL = 5,
} QrStatus;

/**
 * Opaque relay-chain handle.
 */
typedef struct QrChain QrChain;

typedef struct QrReceiverReport {
  double p_s;
  double p_n;
  /**
   * Infinite when `p_n` is zero.
   */
  double s;
  double q_b;
} QrReceiverReport;

typedef struct QrSampleReport {
  uint64_t trials;
  uint64_t seed;
  /**
   * Receiver-input categories: signal, random photon, empty gated, vetoed.
   */
  uint64_t categories[4];
  double p_s;
  double p_n;
  double sigma_p_s;
  double sigma_p_n;
} QrSampleReport;

typedef struct QrQndReport {
  double success_probability;
  double min_fidelity;
  size_t outcome_count;
} QrQndReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qr_version(void);

/**
 * Message of the last failing call on this thread, or an empty string.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *qr_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *qr_status_name(enum QrStatus status);

/**
 * Creates a chain of `n_relays` relays over `distance_km` of fiber with
 * intensity attenuation `atten_per_km` per km.
 *
 * # Safety
 * `out` must be null or valid for writing a pointer.
 */
enum QrStatus qr_chain_new(double distance_km,
                           double atten_per_km,
                           size_t n_relays,
                           double eta,
                           double p_dark,
                           struct QrChain **out);

/**
 * Releases a chain. Null is ignored.
 *
 * # Safety
 * `chain` must be null or a handle from [`qr_chain_new`] not yet freed.
 */
void qr_chain_free(struct QrChain *chain);

/**
 * Fixes relay positions (km from the transmitter). `len` must equal the
 * relay count.
 *
 * # Safety
 * `chain` must be a live handle and `positions_km` valid for `len` reads.
 */
enum QrStatus qr_chain_set_positions(struct QrChain *chain, const double *positions_km, size_t len);

/**
 * Forgets fixed positions so that runs use the optimal placement.
 *
 * # Safety
 * `chain` must be a live handle.
 */
enum QrStatus qr_chain_clear_positions(struct QrChain *chain);

/**
 * Replaces the positions with the numerically optimal placement.
 *
 * # Safety
 * `chain` must be a live handle.
 */
enum QrStatus qr_chain_optimize(struct QrChain *chain);

/**
 * Copies the positions in effect into `out` (capacity `cap`) and stores the
 * relay count in `len`. Returns `BufferTooSmall` with `len` set when `cap`
 * is short.
 *
 * # Safety
 * `chain` must be a live handle, `out` valid for `cap` writes and `len`
 * valid for one write.
 */
enum QrStatus qr_chain_positions(const struct QrChain *chain, double *out, size_t cap, size_t *len);

/**
 * Exact receiver statistics.
 *
 * # Safety
 * `chain` must be a live handle and `out` valid for one write.
 */
enum QrStatus qr_chain_run(const struct QrChain *chain, struct QrReceiverReport *out);

/**
 * Monte-Carlo receiver statistics; deterministic for a given seed.
 *
 * # Safety
 * `chain` must be a live handle and `out` valid for one write.
 */
enum QrStatus qr_chain_sample(const struct QrChain *chain,
                              uint64_t trials,
                              uint64_t seed,
                              struct QrSampleReport *out);

/**
 * Closed-form SNR with `n` optimally placed relays.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QrStatus qr_snr_n_relays(double alpha_x, size_t n, double eta, double p_dark, double *out);

/**
 * Loss `alpha_x` at which the closed-form SNR falls to `s_target`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QrStatus qr_alpha_x_at_snr(size_t n, double eta, double p_dark, double s_target, double *out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum QrStatus qr_qber_from_snr(double s, double *out);

/**
 * Secret-key bits per sifted bit at SNR `s` with reconciliation
 * inefficiency `f_ec`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QrStatus qr_normalized_throughput(double s, double f_ec, double *out);

/**
 * QND measurement of `alpha|H> + beta|V>` with complex amplitudes given as
 * real and imaginary parts.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum QrStatus qr_qnd_measure(double alpha_re,
                             double alpha_im,
                             double beta_re,
                             double beta_im,
                             struct QrQndReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRELAY_H */
