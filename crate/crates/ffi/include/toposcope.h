#ifndef TOPOSCOPE_H
#define TOPOSCOPE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TscStatus {
  TSC_STATUS_OK = 0,
  TSC_STATUS_NULL_POINTER = 1,
  TSC_STATUS_INVALID_ARGUMENT = 2,
  TSC_STATUS_OUT_OF_RANGE = 3,
  TSC_STATUS_BUFFER_TOO_SMALL = 4,
  TSC_STATUS_NUMERICAL = 5,
  TSC_STATUS_PANIC = 6,
} TscStatus;

/**
 * Simplicial complex (vertices, edges, triangles).
 */
typedef struct TscComplex TscComplex;

/**
 * Persistence diagram in degrees 0 and 1.
 */
typedef struct TscDiagram TscDiagram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tsc_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t tsc_last_error_message(char *buf, size_t cap);

/**
 * Rips complex up to triangles at scale `eps` of `n_points` row-major points.
 *
 * # Safety
 * `points` must hold `n_points * dim` doubles; `out` must be writable.
 */
enum TscStatus tsc_rips_complex(const double *points,
                                size_t n_points,
                                size_t dim,
                                double eps,
                                struct TscComplex **out);

/**
 * Complex from an explicit edge list (pairs of vertex ids) with its
 * triangles filled in (clique closure).
 *
 * # Safety
 * `edges` must hold `2 * n_edges` entries (may be null when `n_edges` is 0).
 */
enum TscStatus tsc_clique_complex(size_t n_vertices,
                                  const uint32_t *edges,
                                  size_t n_edges,
                                  struct TscComplex **out);

/**
 * # Safety
 * `c` must be null or a handle from this library, not yet freed.
 */
void tsc_complex_free(struct TscComplex *c);

/**
 * Number of p-simplices (p = 0, 1, 2).
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum TscStatus tsc_complex_count(const struct TscComplex *c, size_t p, size_t *out);

/**
 * Betti numbers (b0, b1, b2) from Laplacian kernels into `out[0..3]`.
 *
 * # Safety
 * `c` must be a live handle; `out` must hold three entries.
 */
enum TscStatus tsc_complex_betti(const struct TscComplex *c, size_t *out);

/**
 * Ascending eigenvalues of the degree-p Hodge Laplacian. `len` receives the
 * count; with `out` null or `cap` too small nothing is copied and
 * `BufferTooSmall` is returned (unless the spectrum is empty).
 *
 * # Safety
 * `c` must be a live handle; `out` must be null or hold `cap` doubles.
 */
enum TscStatus tsc_complex_spectrum(const struct TscComplex *c,
                                    size_t p,
                                    double *out,
                                    size_t cap,
                                    size_t *len);

/**
 * Rips persistence in degrees 0 and 1. A non-positive `eps_max` means the
 * enclosing radius of the cloud.
 *
 * # Safety
 * `points` must hold `n_points * dim` doubles; `out` must be writable.
 */
enum TscStatus tsc_rips_persistence(const double *points,
                                    size_t n_points,
                                    size_t dim,
                                    double eps_max,
                                    struct TscDiagram **out);

/**
 * # Safety
 * `d` must be null or a handle from this library, not yet freed.
 */
void tsc_diagram_free(struct TscDiagram *d);

/**
 * Number of (dim, birth, death) pairs; 0 for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
size_t tsc_diagram_len(const struct TscDiagram *d);

/**
 * Pair `index`; an essential class has death = +infinity.
 *
 * # Safety
 * `d` must be a live handle; the outputs must be writable.
 */
enum TscStatus tsc_diagram_get(const struct TscDiagram *d,
                               size_t index,
                               uint32_t *dim,
                               double *birth,
                               double *death);

/**
 * Largest finite H1 persistence (0 when there is none).
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum TscStatus tsc_diagram_max_h1(const struct TscDiagram *d, double *out);

/**
 * Betti number of degree `dim` at scale `eps`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum TscStatus tsc_diagram_betti_at(const struct TscDiagram *d,
                                    uint32_t dim,
                                    double eps,
                                    size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPOSCOPE_H */
