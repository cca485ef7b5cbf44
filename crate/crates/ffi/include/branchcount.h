#ifndef BRANCHCOUNT_H
#define BRANCHCOUNT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum BcStatus {
  BC_STATUS_OK = 0,
  BC_STATUS_NULL_POINTER = 1,
  BC_STATUS_INVALID_ARGUMENT = 2,
  BC_STATUS_CONFIG_ERROR = 3,
  BC_STATUS_NUMERIC_ERROR = 4,
  BC_STATUS_PANIC = 5,
} BcStatus;

/**
 * Opaque set of branches.
 */
typedef struct BcBranchSet BcBranchSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *bc_last_error_message(void);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *bc_version(void);

/**
 * Spin `a|↑> + b|↓>` measured by an apparatus with `n_up` and `n_down`
 * equally weighted microrecords.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum BcStatus bc_realistic_measurement(double a_re,
                                       double a_im,
                                       double b_re,
                                       double b_im,
                                       uintptr_t n_up,
                                       uintptr_t n_down,
                                       struct BcBranchSet **out);

/**
 * # Safety
 * `set` must come from this library and not be freed; `out_len` must be
 * valid for a write.
 */
enum BcStatus bc_branchset_len(const struct BcBranchSet *set, uintptr_t *out_len);

/**
 * Squared norm of branch `index`.
 *
 * # Safety
 * As for [`bc_branchset_len`].
 */
enum BcStatus bc_branchset_weight(const struct BcBranchSet *set,
                                  uintptr_t index,
                                  double *out_weight);

/**
 * History label of branch `index`, e.g. `up:3`. Free with [`bc_string_free`].
 *
 * # Safety
 * As for [`bc_branchset_len`].
 */
enum BcStatus bc_branchset_label(const struct BcBranchSet *set, uintptr_t index, char **out);

/**
 * Equi-amplitude counts of the `up` and `down` outcomes with fine-grained
 * branches of squared norm `tau_sq`.
 *
 * # Safety
 * `set` as for [`bc_branchset_len`]; both out pointers valid for writes.
 */
enum BcStatus bc_count_equi_amplitude(const struct BcBranchSet *set,
                                      double tau_sq,
                                      uint64_t *out_up,
                                      uint64_t *out_down);

/**
 * `(z+n−1)! / (n! (z−1)!)` as a decimal string. Free with [`bc_string_free`].
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum BcStatus bc_planck_multiplicity(uint64_t z, uint64_t n, char **out);

/**
 * Runs an experiment config given as JSON and returns the result envelope
 * as JSON. Free the result with [`bc_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out_envelope` valid for a
 * pointer write.
 */
enum BcStatus bc_run_config_json(const char *config_json, char **out_envelope);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void bc_string_free(char *s);

/**
 * # Safety
 * `set` must be null or a set returned by this library, freed once.
 */
void bc_branchset_free(struct BcBranchSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRANCHCOUNT_H */
