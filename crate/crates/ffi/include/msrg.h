#ifndef MSRG_H
#define MSRG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum MsrgStatus {
  MSRG_STATUS_OK = 0,
  MSRG_STATUS_NULL_POINTER = 1,
  MSRG_STATUS_INVALID_ARGUMENT = 2,
  MSRG_STATUS_SPACE_MISMATCH = 3,
  MSRG_STATUS_NOT_ON_LATTICE = 4,
  MSRG_STATUS_UNSUPPORTED = 5,
  MSRG_STATUS_OUT_OF_RANGE = 6,
  MSRG_STATUS_BUFFER_TOO_SMALL = 7,
  MSRG_STATUS_INTERNAL = 8,
} MsrgStatus;

/**
 * Built-in symbolic models.
 */
typedef enum MsrgModel {
  MSRG_MODEL_A = 0,
  MSRG_MODEL_B = 1,
} MsrgModel;

/**
 * Treatment of scales beyond the regularization level.
 */
typedef enum MsrgReg {
  /**
   * Scales beyond `N` are zero.
   */
  MSRG_REG_CUTOFF = 0,
  /**
   * Scale `N + 1` is pinned to one.
   */
  MSRG_REG_UNIT = 1,
} MsrgReg;

/**
 * A memoized flow map on bit states.
 */
typedef struct MsrgFlowMap MsrgFlowMap;

/**
 * Initial and boundary data for a symbolic model.
 */
typedef struct MsrgProblem MsrgProblem;

/**
 * A regularized solution on the dyadic lattice.
 */
typedef struct MsrgSolution MsrgSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes, including the terminating nul, of the last error message
 * on this thread; 0 when the last call succeeded.
 */
size_t msrg_last_error_length(void);

/**
 * Copies the last error message into `buf` (nul terminated, truncated to
 * `cap`) and returns the full length including the nul.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t msrg_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static nul-terminated string.
 */
const char *msrg_version(void);

/**
 * Builds a problem from 0/1 initial values `a_1..a_k` (zero beyond) and
 * boundary values `b_0..b_m` (zero beyond).
 *
 * # Safety
 * The arrays must hold the given number of bytes; `out` must be writable.
 */
enum MsrgStatus msrg_problem_new(enum MsrgModel model,
                                 const uint8_t *initial,
                                 size_t initial_len,
                                 const uint8_t *boundary,
                                 size_t boundary_len,
                                 struct MsrgProblem **out_problem);

/**
 * # Safety
 * `problem` must be null or a handle from [`msrg_problem_new`], freed once.
 */
void msrg_problem_free(struct MsrgProblem *problem);

/**
 * Blowup time of the strong solution up to the horizon
 * `horizon_num / 2^horizon_level`. `found` is 1 and the time is written as
 * `time_num / 2^time_level` when a blowup is detected, 0 otherwise.
 *
 * # Safety
 * `problem` must be a live handle; the out pointers must be writable.
 */
enum MsrgStatus msrg_blowup_time(const struct MsrgProblem *problem,
                                 uint64_t horizon_num,
                                 uint32_t horizon_level,
                                 uint8_t *found,
                                 uint64_t *time_num,
                                 uint32_t *time_level);

/**
 * Solves the problem regularized at `level` up to `horizon_num / 2^horizon_level`.
 *
 * # Safety
 * `problem` must be a live handle; `out_solution` must be writable.
 */
enum MsrgStatus msrg_solve(const struct MsrgProblem *problem,
                           uint32_t level,
                           enum MsrgReg reg,
                           uint64_t horizon_num,
                           uint32_t horizon_level,
                           struct MsrgSolution **out_solution);

/**
 * # Safety
 * `solution` must be null or a handle from [`msrg_solve`], freed once.
 */
void msrg_solution_free(struct MsrgSolution *solution);

/**
 * Number of stored times `m tau_scale`, `m = 0..len`, at `scale`.
 *
 * # Safety
 * `solution` must be a live handle; `len` must be writable.
 */
enum MsrgStatus msrg_solution_row_len(const struct MsrgSolution *solution,
                                      uint32_t scale,
                                      size_t *len);

/**
 * The bit `u_scale(index * tau_scale)`.
 *
 * # Safety
 * `solution` must be a live handle; `bit` must be writable.
 */
enum MsrgStatus msrg_solution_value(const struct MsrgSolution *solution,
                                    uint32_t scale,
                                    uint64_t index,
                                    uint8_t *bit);

/**
 * Writes 1 to `ok` when the solution satisfies the governing relation at
 * every resolved lattice point, 0 otherwise.
 *
 * # Safety
 * `solution` must be a live handle; `ok` must be writable.
 */
enum MsrgStatus msrg_solution_residual_ok(const struct MsrgSolution *solution, uint8_t *ok);

/**
 * The flow map `psi^(N)` of the model over one unit of time.
 *
 * # Safety
 * `out_map` must be writable.
 */
enum MsrgStatus msrg_flow_psi_new(enum MsrgModel model,
                                  uint32_t level,
                                  enum MsrgReg reg,
                                  struct MsrgFlowMap **out_map);

/**
 * One renormalization step of `map` in its own model, as a new handle.
 *
 * # Safety
 * `map` must be a live handle; `out_map` must be writable.
 */
enum MsrgStatus msrg_flow_rg_apply(const struct MsrgFlowMap *map, struct MsrgFlowMap **out_map);

/**
 * Applies `map` to the zero-tailed state `input` and writes the first
 * `output_len` output components.
 *
 * # Safety
 * `map` must be a live handle; the arrays must hold the given lengths.
 */
enum MsrgStatus msrg_flow_apply(const struct MsrgFlowMap *map,
                                const uint8_t *input,
                                size_t input_len,
                                uint8_t *output,
                                size_t output_len);

/**
 * # Safety
 * `map` must be null or a flow-map handle, freed once.
 */
void msrg_flow_free(struct MsrgFlowMap *map);

/**
 * Decimal digits of the circle-model coefficient `p_n^(N)` of `x_0`,
 * nul terminated. `needed` receives the full length including the nul;
 * a short buffer yields [`MsrgStatus::BufferTooSmall`] and no write.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes; `needed` must be writable.
 */
enum MsrgStatus msrg_phase_p_coefficient(uint32_t n,
                                         uint32_t level,
                                         char *buf,
                                         size_t cap,
                                         size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSRG_H */
