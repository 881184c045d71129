#ifndef HMFE_H
#define HMFE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HmfeStatus {
  HMFE_STATUS_OK = 0,
  HMFE_STATUS_NULL_POINTER = 1,
  HMFE_STATUS_PARSE = 2,
  HMFE_STATUS_PRECONDITION = 3,
  /*
   No polynomial solution or no admissible root.
   */
  HMFE_STATUS_NOT_FOUND = 4,
  /*
   The point is a Weierstrass point.
   */
  HMFE_STATUS_SINGULARITY = 5,
  HMFE_STATUS_BUFFER_TOO_SMALL = 6,
  HMFE_STATUS_PANIC = 7,
} HmfeStatus;

typedef enum HmfeChart {
  HMFE_CHART_C0 = 0,
  HMFE_CHART_C0_PRIME = 1,
} HmfeChart;

/*
 Hyperelliptic curve given by its branch points.
 */
typedef struct HmfeCurve HmfeCurve;

/*
 Result of polynomial detection for data `S`.
 */
typedef struct HmfeDetection HmfeDetection;

/*
 A constructed solution together with its construction report.
 */
typedef struct HmfeSolution HmfeSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into the library on this thread.
 */
const char *hmfe_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *hmfe_version(void);

/*
 Detects polynomial solutions for data `S` given as comma separated
 rationals in ascending order, e.g. `"1,1"`. A detection without a
 solution still succeeds; query it with `hmfe_detection_found`.

 # Safety
 `data` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HmfeStatus hmfe_detect(const char *data, struct HmfeDetection **out);

/*
 Writes 1 to `found` when a polynomial solution was certified, 0 otherwise.

 # Safety
 `det` must come from `hmfe_detect`; `found` must be valid.
 */
enum HmfeStatus hmfe_detection_found(const struct HmfeDetection *det, int32_t *found);

/*
 Smallest certified root `a = 1/Q(0)` as a double.

 # Safety
 `det` must come from `hmfe_detect`; `a` must be valid.
 */
enum HmfeStatus hmfe_detection_root(const struct HmfeDetection *det, double *a);

/*
 JSON report of the detection, NUL-terminated. `*needed` receives the
 required size; `BufferTooSmall` is returned when `cap` is below it.

 # Safety
 `det` must come from `hmfe_detect`; `buf` must hold `cap` bytes or be NULL.
 */
enum HmfeStatus hmfe_detection_json(const struct HmfeDetection *det,
                                    char *buf,
                                    size_t cap,
                                    size_t *needed);

/*
 # Safety
 `det` must come from `hmfe_detect` and not be used afterwards. NULL is ignored.
 */
void hmfe_detection_free(struct HmfeDetection *det);

/*
 Constructs the solution for weights `λ_1..λ_g` given as comma separated
 rationals. Returns `NotFound` when no admissible root exists.

 # Safety
 `lambdas` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HmfeStatus hmfe_construct(const char *lambdas, struct HmfeSolution **out);

/*
 Genus of the solution's curve.

 # Safety
 `sol` must come from `hmfe_construct`; `genus` must be valid.
 */
enum HmfeStatus hmfe_solution_genus(const struct HmfeSolution *sol, size_t *genus);

/*
 The admissible root `a`.

 # Safety
 `sol` must come from `hmfe_construct`; `a` must be valid.
 */
enum HmfeStatus hmfe_solution_a(const struct HmfeSolution *sol, double *a);

/*
 Coefficients of `u` in powers of `xy`. `*len` receives the count; the
 call fails with `BufferTooSmall` when `cap` is below it.

 # Safety
 `sol` must come from `hmfe_construct`; `coeffs` must hold `cap` doubles.
 */
enum HmfeStatus hmfe_solution_u(const struct HmfeSolution *sol,
                                double *coeffs,
                                size_t cap,
                                size_t *len);

/*
 JSON construction report, with the same buffer protocol as
 `hmfe_detection_json`.

 # Safety
 `sol` must come from `hmfe_construct`; `buf` must hold `cap` bytes or be NULL.
 */
enum HmfeStatus hmfe_solution_json(const struct HmfeSolution *sol,
                                   char *buf,
                                   size_t cap,
                                   size_t *needed);

/*
 # Safety
 `sol` must come from `hmfe_construct` and not be used afterwards. NULL is ignored.
 */
void hmfe_solution_free(struct HmfeSolution *sol);

/*
 Curve from `n` branch points stored as interleaved `re, im` pairs.

 # Safety
 `re_im` must hold `2 n` doubles; `out` must be valid.
 */
enum HmfeStatus hmfe_curve_new(const double *re_im, size_t n, struct HmfeCurve **out);

/*
 Curve whose branch points are the `n` roots of unity scaled by `radius`.

 # Safety
 `out` must be valid.
 */
enum HmfeStatus hmfe_curve_roots_of_unity(size_t n, double radius, struct HmfeCurve **out);

/*
 # Safety
 `curve` must come from a curve constructor; `genus` must be valid.
 */
enum HmfeStatus hmfe_curve_genus(const struct HmfeCurve *curve, size_t *genus);

/*
 # Safety
 `curve` must come from a curve constructor and not be used afterwards. NULL is ignored.
 */
void hmfe_curve_free(struct HmfeCurve *curve);

/*
 `φ = e^ψ` at `re + i·im` in the chart `chart_id` (an `HmfeChart` value).

 # Safety
 Handles must be valid; `value` must be valid.
 */
enum HmfeStatus hmfe_phi(const struct HmfeSolution *sol,
                         const struct HmfeCurve *curve,
                         int32_t chart_id,
                         double re,
                         double im,
                         double *value);

/*
 `ψ` at `re + i·im`; `Singularity` at Weierstrass points.

 # Safety
 Handles must be valid; `value` must be valid.
 */
enum HmfeStatus hmfe_psi(const struct HmfeSolution *sol,
                         const struct HmfeCurve *curve,
                         int32_t chart_id,
                         double re,
                         double im,
                         double *value);

/*
 Numerical total mass and its expected value `8π(g + 1)`.

 # Safety
 Handles must be valid; output pointers must be valid.
 */
enum HmfeStatus hmfe_mass(const struct HmfeSolution *sol,
                          const struct HmfeCurve *curve,
                          size_t resolution,
                          double *estimate,
                          double *expected);

/*
 Maximal finite-difference residual relative to `max φ` on a square grid
 of chart `C0` centred at the origin, with the default exclusion radius.

 # Safety
 Handles must be valid; `max_rel` must be valid.
 */
enum HmfeStatus hmfe_residual_max(const struct HmfeSolution *sol,
                                  const struct HmfeCurve *curve,
                                  double half_width,
                                  size_t resolution,
                                  double fd_step,
                                  double *max_rel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HMFE_H */
