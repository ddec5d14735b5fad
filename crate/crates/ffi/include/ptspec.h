#ifndef PTSPEC_H
#define PTSPEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum PtspecStatus {
  PTSPEC_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  PTSPEC_STATUS_NULL_POINTER = 1,
  /*
   A string argument was not valid UTF-8.
   */
  PTSPEC_STATUS_INVALID_UTF8 = 2,
  /*
   Malformed JSON or an argument outside its domain.
   */
  PTSPEC_STATUS_INVALID_INPUT = 3,
  /*
   The computation failed numerically.
   */
  PTSPEC_STATUS_NUMERICAL = 4,
  /*
   Internal error; the library state is unaffected.
   */
  PTSPEC_STATUS_PANIC = 5,
} PtspecStatus;

/*
 Periodic CMV operator.
 */
typedef struct PtspecCmv PtspecCmv;

/*
 Periodic Jacobi operator.
 */
typedef struct PtspecJacobi PtspecJacobi;

/*
 Periodic piecewise-constant potential of a continuum Schrödinger operator.
 */
typedef struct PtspecPotential PtspecPotential;

/*
 Chain of periodic approximants.
 */
typedef struct PtspecSequence PtspecSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Schema version of every JSON report.
 */
uint32_t ptspec_schema_version(void);

/*
 Message of the last failed call on this thread (empty after a success).
 Valid until the next call on this thread; do not free.
 */
const char *ptspec_last_error(void);

/*
 Release a string returned by this library. Null is ignored.

 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void ptspec_string_free(char *s);

/*
 Release a Jacobi handle. Null is ignored.

 # Safety
 `h` must be null or a handle from this library, not yet freed.
 */
void ptspec_jacobi_free(struct PtspecJacobi *h);

/*
 Release a potential handle. Null is ignored.

 # Safety
 `h` must be null or a handle from this library, not yet freed.
 */
void ptspec_potential_free(struct PtspecPotential *h);

/*
 Release a CMV handle. Null is ignored.

 # Safety
 `h` must be null or a handle from this library, not yet freed.
 */
void ptspec_cmv_free(struct PtspecCmv *h);

/*
 Release a sequence handle. Null is ignored.

 # Safety
 `h` must be null or a handle from this library, not yet freed.
 */
void ptspec_sequence_free(struct PtspecSequence *h);

/*
 Parse a Jacobi operator, e.g. `{"p":2,"a":[1,1],"b":[1,-1]}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PtspecStatus ptspec_jacobi_from_json(const char *json, struct PtspecJacobi **out);

/*
 Discriminant `Δ(E)`.

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_jacobi_discriminant(const struct PtspecJacobi *h, double e, double *out);

/*
 Band structure as JSON.

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_jacobi_bands_json(const struct PtspecJacobi *h, char **out);

/*
 Parse a potential, e.g. `{"T":2,"breakpoints":[0,1,2],"values":[1,0]}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PtspecStatus ptspec_potential_from_json(const char *json, struct PtspecPotential **out);

/*
 Discriminant `Δ(E)` of `-y'' + V y = E y`.

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_potential_discriminant(const struct PtspecPotential *h,
                                                double e,
                                                double *out);

/*
 Band structure in the window `(-∞, e_max]` as JSON.

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_potential_bands_json(const struct PtspecPotential *h,
                                              double e_max,
                                              char **out);

/*
 Besicovitch and Stepanov norms.

 # Safety
 `h` must be a live handle; both outputs must be writable.
 */
enum PtspecStatus ptspec_potential_norms(const struct PtspecPotential *h,
                                         double *besicovitch,
                                         double *stepanov);

/*
 Parse a CMV operator, e.g. `{"p":2,"alpha":[[0.5,0],[0.5,0]]}`
 (complex numbers as `[re, im]`).

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PtspecStatus ptspec_cmv_from_json(const char *json, struct PtspecCmv **out);

/*
 Spectral arcs as JSON.

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_cmv_bands_json(const struct PtspecCmv *h, char **out);

/*
 Certify τ-homogeneity of a set with the default lattice. `set_json` is
 an interval set (`{"parts":[[lo,hi],...]}`) when `circle == 0`, an arc
 set (`[[start,end],...]`) otherwise.

 # Safety
 `set_json` must be a NUL-terminated string; `out` must be writable.
 */
enum PtspecStatus ptspec_certify_homogeneity_json(const char *set_json,
                                                  int32_t circle,
                                                  double tau,
                                                  double delta0,
                                                  char **out);

/*
 Generate a PT sequence. `kind` is `continuum`, `jacobi` or `cmv`;
 `schedule` is null for the default, else as the CLI `--schedule` flag.

 # Safety
 String arguments must be NUL-terminated (or null where allowed); `out`
 must be writable.
 */
enum PtspecStatus ptspec_pt_generate(const char *kind,
                                     uint64_t seed,
                                     size_t levels,
                                     const char *schedule,
                                     struct PtspecSequence **out);

/*
 Parse a sequence previously written by [`ptspec_sequence_to_json`].

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PtspecStatus ptspec_sequence_from_json(const char *json, struct PtspecSequence **out);

/*
 Serialize a sequence.

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_sequence_to_json(const struct PtspecSequence *h, char **out);

/*
 Number of levels.

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_sequence_len(const struct PtspecSequence *h, size_t *out);

/*
 Step-by-step homogeneity budget as JSON. `options_json` is null for the
 defaults, else a partial options object, e.g. `{"tau":0.5}`.

 # Safety
 `h` must be a live handle; `options_json` null or NUL-terminated; `out`
 must be writable.
 */
enum PtspecStatus ptspec_step_homogeneity_json(const struct PtspecSequence *h,
                                               const char *options_json,
                                               char **out);

/*
 Semicontinuity check on the first band cluster. `e_max` is the window
 top (`NaN` or `+∞` for discrete kinds).

 # Safety
 `h` must be a live handle; `out` must be writable.
 */
enum PtspecStatus ptspec_semicontinuity_json(const struct PtspecSequence *h,
                                             double e_max,
                                             char **out);

/*
 Fit or verify an estimate over an ensemble. `check` is one of the names
 in the CLI `verify --check` list except `semicontinuity`/`gap-sums`;
 `constant` is `NaN` to fit; `e_max` is `NaN` when not needed.

 # Safety
 String arguments must be NUL-terminated; `out` must be writable.
 */
enum PtspecStatus ptspec_verify_json(const char *check,
                                     const char *ensemble_json,
                                     double constant,
                                     double e_max,
                                     size_t n_max,
                                     char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTSPEC_H */
