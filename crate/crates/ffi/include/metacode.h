#ifndef METACODE_H
#define METACODE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum McStatus {
  MC_STATUS_OK = 0,
  MC_STATUS_NULL_POINTER = 1,
  MC_STATUS_INVALID_ARGUMENT = 2,
  MC_STATUS_NO_SOLUTION = 3,
  MC_STATUS_SINGULAR = 4,
  MC_STATUS_IO = 5,
  MC_STATUS_FORMAT = 6,
  MC_STATUS_BUFFER_TOO_SMALL = 7,
  MC_STATUS_PANIC = 8,
} McStatus;

/**
 * Opaque oracle handle.
 */
typedef struct McOracle McOracle;

/**
 * Opaque surrogate handle.
 */
typedef struct McSurrogate McSurrogate;

typedef struct McComplex {
  double re;
  double im;
} McComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *mc_last_error(void);

/**
 * Number of points on the fixed frequency grid (61).
 */
size_t mc_n_freq(void);

/**
 * Frequency of grid point `i` in Hz, or NaN when out of range.
 */
double mc_grid_freq(size_t i);

/**
 * Reflection coefficient of load impedance `zl` against free space.
 */
enum McStatus mc_reflection_of_load(struct McComplex zl, struct McComplex *gamma);

/**
 * Load reflections of the built-in PIN diode at `freq_hz`, state 0 then 1.
 */
enum McStatus mc_pin_load_reflections(double freq_hz, struct McComplex *gl0, struct McComplex *gl1);

/**
 * Reflection seen at the free-space port with the static part described by
 * `(a22, theta22)` and the switch port loaded by `gl`.
 */
enum McStatus mc_gamma1_reduced(double a22,
                                double theta22,
                                struct McComplex gl,
                                struct McComplex *gamma);

/**
 * Switch-port `S22` that makes the two loaded states reflect in antiphase.
 */
enum McStatus mc_solve_target(struct McComplex gl0,
                              struct McComplex gl1,
                              struct McComplex *s22,
                              double *a22,
                              double *theta22);

/**
 * Parses 16 hex digits into genome bits.
 */
enum McStatus mc_genome_parse(const char *hex, uint64_t *bits);

/**
 * Writes the 16-digit hex form plus a terminating NUL; `len` must be at least 17.
 */
enum McStatus mc_genome_format(uint64_t bits, char *buf, size_t len);

/**
 * Oracle with the built-in constants and geometry.
 */
struct McOracle *mc_oracle_new(void);

void mc_oracle_free(struct McOracle *o);

/**
 * 61-point `S22` of `bits` into `out` (at least `mc_n_freq()` entries).
 */
enum McStatus mc_oracle_response(const struct McOracle *o,
                                 uint64_t bits,
                                 struct McComplex *dst,
                                 size_t len);

/**
 * Hex SHA-256 fingerprint of the oracle; `len` must be at least 65.
 */
enum McStatus mc_oracle_fingerprint(const struct McOracle *o, char *buf, size_t len);

/**
 * GA against the oracle over the grid band `[f_lo, f_hi]` with the built-in
 * PIN diode target. `population` and `generations` of 0 take the defaults.
 */
enum McStatus mc_design_oracle(const struct McOracle *o,
                               double f_lo,
                               double f_hi,
                               size_t population,
                               size_t generations,
                               uint64_t seed,
                               uint64_t *bits,
                               double *fitness);

/**
 * Loads a surrogate checkpoint into `*model`.
 */
enum McStatus mc_surrogate_load(const char *path, struct McSurrogate **model);

void mc_surrogate_free(struct McSurrogate *m);

/**
 * Predicted 61-point `S22` of `bits`.
 */
enum McStatus mc_surrogate_predict(const struct McSurrogate *m,
                                   uint64_t bits,
                                   struct McComplex *dst,
                                   size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* METACODE_H */
