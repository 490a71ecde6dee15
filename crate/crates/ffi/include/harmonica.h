#ifndef HARMONICA_H
#define HARMONICA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  HARM_FORMAT_OBJ = 0,
  HARM_FORMAT_PLY = 1,
  HARM_FORMAT_CSV = 2,
} HarmFormat;

/**
 * Result of every call. Values 1 to 4 match the exit codes of the command line tool.
 */
typedef enum {
  HARM_STATUS_OK = 0,
  HARM_STATUS_NOT_IMMERSION = 1,
  HARM_STATUS_INVALID_ARGUMENT = 2,
  HARM_STATUS_NUMERICAL = 3,
  HARM_STATUS_IO = 4,
  HARM_STATUS_NULL_POINTER = 5,
  HARM_STATUS_BUFFER_TOO_SMALL = 6,
  HARM_STATUS_PANIC = 7,
} HarmStatus;

typedef enum {
  HARM_SUITE_IDENTITIES = 0,
  HARM_SUITE_ENDS = 1,
  HARM_SUITE_CURVATURE = 2,
  HARM_SUITE_ALL = 3,
} HarmSuite;

/**
 * Opaque catalog family.
 */
typedef struct HarmFamily HarmFamily;

/**
 * Opaque triangle mesh.
 */
typedef struct HarmMesh HarmMesh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next failing call.
 */
const char *harm_last_error(void);

/**
 * Builds a family from a JSON spec such as `{"family":"torus","params":{"a":0.5}}`.
 * Parameters outside the validity predicate give `HARM_STATUS_INVALID_ARGUMENT`.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string and `out` a valid pointer.
 */
HarmStatus harm_family_new(const char *spec_json, HarmFamily **out);

/**
 * # Safety
 * `family` must come from `harm_family_new` and not be used afterwards. NULL is ignored.
 */
void harm_family_free(HarmFamily *family);

/**
 * Number of sheets over the z-plane (2 on the torus, 1 otherwise).
 *
 * # Safety
 * `family` must be a live handle.
 */
size_t harm_family_sheets(const HarmFamily *family);

/**
 * phi(z) on sheet `sheet` (+1 or -1, ignored off the torus), written as
 * `out = [re phi1, im phi1, re phi2, im phi2, re phi3, im phi3]`.
 *
 * # Safety
 * `family` must be a live handle and `out` must hold 6 doubles.
 */
HarmStatus harm_eval_phi(const HarmFamily *family,
                         double re,
                         double im,
                         int32_t sheet,
                         double *out);

/**
 * ||phi||^2 - |h| at z; positive exactly where the map is immersed.
 *
 * # Safety
 * `family` must be a live handle and `out` a valid pointer.
 */
HarmStatus harm_immersion_margin(const HarmFamily *family,
                                 double re,
                                 double im,
                                 int32_t sheet,
                                 double *out);

/**
 * Basepoint of the immersion: `out = [re z, im z]`.
 *
 * # Safety
 * `family` must be a live handle and `out` must hold 2 doubles.
 */
HarmStatus harm_basepoint(const HarmFamily *family, double *out);

/**
 * X at the end of a polyline that starts at the basepoint and visits the `n` points
 * `zs = [re0, im0, re1, im1, ...]`. Writes `out = [x1, x2, x3]`.
 *
 * # Safety
 * `family` must be a live handle, `zs` must hold `2 n` doubles and `out` 3 doubles.
 */
HarmStatus harm_evaluate(const HarmFamily *family, const double *zs, size_t n, double *out);

/**
 * Integral of K dS over the surface and its error estimate.
 *
 * # Safety
 * `family` must be a live handle; `value` and `error` valid pointers (`error` may be NULL).
 */
HarmStatus harm_total_curvature(const HarmFamily *family, double *value, double *error);

/**
 * The b in (-2, 0) that kills the real periods of the torus with parameter a in (0, 1).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
HarmStatus harm_torus_period_b(double a, double *out);

/**
 * Runs verification suites and returns the JSON report in `*out_json` (free it with
 * `harm_string_free`). `*passed` is 1 when every suite passes. Parameters outside the validity
 * predicate are diagnosed in the report rather than rejected.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out_json` and `passed` valid pointers.
 */
HarmStatus harm_verify(const char *spec_json,
                       HarmSuite suite,
                       size_t points,
                       uint64_t seed,
                       char **out_json,
                       int32_t *passed);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. NULL is ignored.
 */
void harm_string_free(char *s);

/**
 * Samples the family on its default n1 x n2 parameter grid.
 *
 * # Safety
 * `family` must be a live handle and `out` a valid pointer.
 */
HarmStatus harm_mesh_sample(const HarmFamily *family, size_t n1, size_t n2, HarmMesh **out);

/**
 * # Safety
 * `mesh` must come from `harm_mesh_sample` and not be used afterwards. NULL is ignored.
 */
void harm_mesh_free(HarmMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle or NULL.
 */
size_t harm_mesh_vertex_count(const HarmMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle or NULL.
 */
size_t harm_mesh_face_count(const HarmMesh *mesh);

/**
 * Copies vertex positions as `[x0, y0, z0, x1, ...]`; `len` is the buffer length in doubles.
 *
 * # Safety
 * `mesh` must be a live handle and `buf` must hold `len` doubles.
 */
HarmStatus harm_mesh_vertices(const HarmMesh *mesh, double *buf, size_t len);

/**
 * Copies zero-based triangle indices as `[a0, b0, c0, a1, ...]`; `len` counts indices.
 *
 * # Safety
 * `mesh` must be a live handle and `buf` must hold `len` indices.
 */
HarmStatus harm_mesh_faces(const HarmMesh *mesh, uint32_t *buf, size_t len);

/**
 * Writes the mesh to `path`.
 *
 * # Safety
 * `mesh` must be a live handle and `path` a NUL-terminated string.
 */
HarmStatus harm_mesh_write(const HarmMesh *mesh, const char *path, HarmFormat format);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARMONICA_H */
