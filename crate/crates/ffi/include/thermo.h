#ifndef THERMO_H
#define THERMO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * `method` argument of [`thermo_qfi`]: closed form.
 */
#define THERMO_QFI_ANALYTIC 0

/**
 * `method` argument of [`thermo_qfi`]: fidelity-based finite difference.
 */
#define THERMO_QFI_FINITE_DIFFERENCE 1

/**
 * Result code of every `thermo_*` call.
 */
typedef enum ThermoStatus {
  THERMO_STATUS_OK = 0,
  THERMO_STATUS_NULL_POINTER = 1,
  THERMO_STATUS_INVALID_ARGUMENT = 2,
  THERMO_STATUS_NON_FINITE = 3,
  THERMO_STATUS_ORTHOGONAL_POSTSELECTION = 4,
  THERMO_STATUS_INSENSITIVE_POSTSELECTION = 5,
  THERMO_STATUS_GIBBS_OVERFLOW = 6,
  THERMO_STATUS_TRUNCATION_INSUFFICIENT = 7,
  THERMO_STATUS_NO_CONVERGENCE = 8,
  THERMO_STATUS_INSUFFICIENT_PRECISION = 9,
  THERMO_STATUS_INTERNAL = 10,
  THERMO_STATUS_PANIC = 11,
} ThermoStatus;

/**
 * Model parameters: spin Hamiltonian, impulsive coupling, pointer width and
 * Fock truncation.
 */
typedef struct ThermoModel ThermoModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model. `fock_dim` must be at least 2.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer. The
 * returned handle must be released with [`thermo_model_free`].
 */
enum ThermoStatus thermo_model_new(double omega_z,
                                   double omega_r,
                                   double g0,
                                   double sigma,
                                   size_t fock_dim,
                                   struct ThermoModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from [`thermo_model_new`] not yet freed.
 */
void thermo_model_free(struct ThermoModel *model);

/**
 * Exact weak value `S_w` of the thermal state at `beta` for the
 * postselection `(theta, phi)`.
 *
 * # Safety
 * `model` must be a live handle; `out_re` and `out_im` must be writable.
 */
enum ThermoStatus thermo_weak_value(const struct ThermoModel *model,
                                    double theta,
                                    double phi,
                                    double beta,
                                    double *out_re,
                                    double *out_im);

/**
 * Linearized weak value, valid for small `beta·‖H‖`.
 *
 * # Safety
 * As [`thermo_weak_value`].
 */
enum ThermoStatus thermo_weak_value_first_order(const struct ThermoModel *model,
                                                double theta,
                                                double phi,
                                                double beta,
                                                double *out_re,
                                                double *out_im);

/**
 * Inverse temperature estimated from a measured weak value. The real part
 * of the linear-response ratio goes to `out_beta`, its imaginary part to
 * `out_residue`.
 *
 * # Safety
 * `model` must be a live handle; `out_beta` and `out_residue` must be writable.
 */
enum ThermoStatus thermo_invert_beta(const struct ThermoModel *model,
                                     double theta,
                                     double phi,
                                     double weak_re,
                                     double weak_im,
                                     double *out_beta,
                                     double *out_residue);

/**
 * Quantum Fisher information of the pointer state with respect to β, by
 * [`THERMO_QFI_ANALYTIC`] or [`THERMO_QFI_FINITE_DIFFERENCE`].
 *
 * # Safety
 * `model` must be a live handle; `out_fisher` must be writable.
 */
enum ThermoStatus thermo_qfi(const struct ThermoModel *model,
                             double theta,
                             double phi,
                             double beta,
                             int32_t method,
                             double *out_fisher);

/**
 * Cramér–Rao bound `1/(n·fisher)`. When `fisher` is zero no bound exists:
 * `*out_informative` is set to false and `*out_bound` is left untouched.
 *
 * # Safety
 * `out_bound` and `out_informative` must be writable.
 */
enum ThermoStatus thermo_cramer_rao(double fisher,
                                    uint64_t n_measurements,
                                    double *out_bound,
                                    bool *out_informative);

/**
 * Closed-form pointer readouts `(⟨z⟩, ⟨p⟩)` of the weak-limit state.
 *
 * # Safety
 * `model` must be a live handle; `out_z` and `out_p` must be writable.
 */
enum ThermoStatus thermo_pointer_readouts(const struct ThermoModel *model,
                                          double theta,
                                          double phi,
                                          double beta,
                                          double *out_z,
                                          double *out_p);

/**
 * Exact evolution in the truncated Fock space followed by postselection:
 * postselection probability, infidelity against the weak-limit state and
 * the readouts `(⟨z⟩, ⟨p⟩)`.
 *
 * # Safety
 * `model` must be a live handle; all out-pointers must be writable.
 */
enum ThermoStatus thermo_pointer_exact(const struct ThermoModel *model,
                                       double theta,
                                       double phi,
                                       double beta,
                                       double *out_prob,
                                       double *out_infidelity,
                                       double *out_z,
                                       double *out_p);

/**
 * Message for the last failing call on this thread, or null if none. The
 * string stays valid until the next failing call on the same thread.
 */
const char *thermo_last_error(void);

/**
 * Static description of a status code; unknown codes map to
 * `"unknown status"`.
 */
const char *thermo_status_str(int32_t status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THERMO_H */
