#ifndef DLRBF_H
#define DLRBF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DlrbfStatus {
  DLRBF_STATUS_OK = 0,
  DLRBF_STATUS_NULL_POINTER = 1,
  DLRBF_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad config, kernel parameters or arguments.
   */
  DLRBF_STATUS_VALIDATION = 3,
  /**
   * A solve failed (singular system, divergence, every N failed).
   */
  DLRBF_STATUS_SOLVER = 4,
  /**
   * The caller's buffer is too small; the required size was written.
   */
  DLRBF_STATUS_BUFFER_TOO_SMALL = 5,
  DLRBF_STATUS_OUT_OF_RANGE = 6,
  DLRBF_STATUS_PANIC = 7,
} DlrbfStatus;

/**
 * Per-record outcome.
 */
typedef enum DlrbfRecordStatus {
  DLRBF_RECORD_STATUS_OK = 0,
  DLRBF_RECORD_STATUS_NOT_CONVERGED = 1,
  DLRBF_RECORD_STATUS_FAILED = 2,
} DlrbfRecordStatus;

/**
 * Opaque radial kernel.
 */
typedef struct DlrbfKernel DlrbfKernel;

/**
 * Opaque result of a config run.
 */
typedef struct DlrbfRun DlrbfRun;

/**
 * One row of a convergence run. `consistency_residual` is NaN for Newton rows.
 */
typedef struct DlrbfRecord {
  size_t n;
  double max_error_u;
  double l2_error_u;
  double consistency_residual;
  double condition_estimate;
  size_t iterations;
  double wall_time_ms;
  /**
   * 0 for DLM, 1 for Newton.
   */
  uint32_t solver;
  enum DlrbfRecordStatus status;
} DlrbfRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *dlrbf_version(void);

/**
 * Message of the last failure on this thread; empty if none. Valid until the
 * next failing call on this thread.
 */
const char *dlrbf_last_error(void);

/**
 * Build a kernel from a TOML table such as `family = "multiquadric"\nc = 0.5`.
 * Operator-derived families use `R = d2/dx2` in 1D or the Laplacian in 2D,
 * chosen from `base`, with `p = q = identity`.
 *
 * # Safety
 * `spec` must be a valid C string and `out` a valid pointer.
 */
enum DlrbfStatus dlrbf_kernel_from_toml(const char *spec, struct DlrbfKernel **out);

/**
 * Display label of the kernel, owned by the handle.
 *
 * # Safety
 * `kernel` must be null or a live handle.
 */
const char *dlrbf_kernel_label(const struct DlrbfKernel *kernel);

/**
 * Write `phi(r), phi'(r), ..., phi^(max_order)(r)` into `out[0..=max_order]`.
 *
 * # Safety
 * `kernel` must be a live handle and `out` must hold `out_len` doubles.
 */
enum DlrbfStatus dlrbf_kernel_derivatives(const struct DlrbfKernel *kernel,
                                          double r,
                                          size_t max_order,
                                          double *out,
                                          size_t out_len);

/**
 * # Safety
 * `kernel` must be null or a handle from [`dlrbf_kernel_from_toml`] not yet freed.
 */
void dlrbf_kernel_free(struct DlrbfKernel *kernel);

/**
 * Run every solver of a TOML config over its `n`/`n_list`. Per-N failures are
 * kept as records; only whole-run failures return an error.
 *
 * # Safety
 * `config` must be a valid C string and `out` a valid pointer.
 */
enum DlrbfStatus dlrbf_run_config(const char *config, struct DlrbfRun **out);

/**
 * Number of records, 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t dlrbf_run_len(const struct DlrbfRun *run);

/**
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum DlrbfStatus dlrbf_run_record(const struct DlrbfRun *run,
                                  size_t index,
                                  struct DlrbfRecord *out);

/**
 * Write the run as CSV (NUL-terminated) into `buf`. `needed` receives the size
 * including the terminator; call with `buf = NULL, len = 0` to query it.
 *
 * # Safety
 * `run` must be a live handle, `buf` must hold `len` bytes or be null with
 * `len == 0`, and `needed` must be null or valid.
 */
enum DlrbfStatus dlrbf_run_csv(const struct DlrbfRun *run, char *buf, size_t len, size_t *needed);

/**
 * # Safety
 * `run` must be null or a handle from [`dlrbf_run_config`] not yet freed.
 */
void dlrbf_run_free(struct DlrbfRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DLRBF_H */
