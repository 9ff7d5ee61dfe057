#ifndef DYNLABEL_H
#define DYNLABEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// How augmented solvers repair their extra labels.
typedef enum DynlabelAugment {
  DYNLABEL_AUGMENT_LOCAL = 0,
  DYNLABEL_AUGMENT_FULL = 1,
} DynlabelAugment;

// Result of a call.
typedef enum DynlabelStatus {
  DYNLABEL_STATUS_OK = 0,
  DYNLABEL_STATUS_NULL_POINTER = 1,
  DYNLABEL_STATUS_INVALID_ARGUMENT = 2,
  DYNLABEL_STATUS_UNKNOWN_ALGO = 3,
  DYNLABEL_STATUS_INVALID_SCALE = 4,
  DYNLABEL_STATUS_INVALID_SHIFT = 5,
  DYNLABEL_STATUS_DUPLICATE_ID = 6,
  DYNLABEL_STATUS_UNKNOWN_ID = 7,
  DYNLABEL_STATUS_OUT_OF_FRAME = 8,
  DYNLABEL_STATUS_NOT_A_SQUARE = 9,
  DYNLABEL_STATUS_INVALID_WIDTH = 10,
  DYNLABEL_STATUS_COORD_OUT_OF_RANGE = 11,
  DYNLABEL_STATUS_UNSUPPORTED_MODE = 12,
  DYNLABEL_STATUS_BUFFER_TOO_SMALL = 13,
  DYNLABEL_STATUS_INVARIANT_VIOLATION = 14,
  DYNLABEL_STATUS_INTERNAL = 15,
} DynlabelStatus;

// Opaque solver handle.
typedef struct DynlabelSolver DynlabelSolver;

// Solver parameters.
typedef struct DynlabelConfig {
  // NUL-terminated algorithm name: mis-ors, mis-graph, grid, grid-k,
  // line, g-grid, g-grid-k or g-line.
  const char *algo;
  // Shifting parameter of grid-k and g-grid-k.
  size_t k;
  // Decimal exponent of the coordinate scale, 0 to 9.
  uint32_t scale_exponent;
  enum DynlabelAugment augment;
  // Grid window for grid and g-grid, in grid points: rows and columns in
  // `origin .. origin + extent`. An extent of 0 fits the window to the
  // initial labels with a margin of one point.
  int64_t grid_row0;
  int64_t grid_col0;
  int64_t grid_extent;
} DynlabelConfig;

// A label in label units; `width` is 1 for unit squares.
typedef struct DynlabelLabel {
  uint64_t id;
  double x;
  double y;
  double width;
} DynlabelLabel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default parameters for `algo`: k = 2, scale exponent 3, local repair and
// a window fitted to the initial labels.
struct DynlabelConfig dynlabel_config_default(const char *algo);

// Builds a solver over `len` initial labels and stores it in `*out`. On
// failure `*out` is null and, when `err_buf` is non-null, a NUL-terminated
// message truncated to `err_len` bytes is written there.
//
// # Safety
// `config` and `out` must be valid pointers, `labels` must point to `len`
// labels (or be null with `len == 0`), and `err_buf` must be null or point
// to `err_len` writable bytes.
enum DynlabelStatus dynlabel_solver_new(const struct DynlabelConfig *config,
                                        const struct DynlabelLabel *labels,
                                        size_t len,
                                        struct DynlabelSolver **out,
                                        char *err_buf,
                                        size_t err_len);

// Releases a solver; null is ignored.
//
// # Safety
// `solver` must be null or a handle from [`dynlabel_solver_new`] that has
// not been freed.
void dynlabel_solver_free(struct DynlabelSolver *solver);

// Inserts a label.
//
// # Safety
// `solver` must be a live handle.
enum DynlabelStatus dynlabel_solver_insert(struct DynlabelSolver *solver,
                                           struct DynlabelLabel label);

// Deletes the label with `id`.
//
// # Safety
// `solver` must be a live handle.
enum DynlabelStatus dynlabel_solver_delete(struct DynlabelSolver *solver, uint64_t id);

// Size of the maintained solution; 0 for a null handle.
//
// # Safety
// `solver` must be null or a live handle.
size_t dynlabel_solver_size(const struct DynlabelSolver *solver);

// Writes the ids of the solution, ascending, into `buf` and their count
// into `*len_out`. If `cap` is too small nothing is written to `buf`, the
// required count is stored and `BufferTooSmall` is returned.
//
// # Safety
// `solver` and `len_out` must be valid, and `buf` must point to `cap`
// writable ids (or be null with `cap == 0`).
enum DynlabelStatus dynlabel_solver_solution(struct DynlabelSolver *solver,
                                             uint64_t *buf,
                                             size_t cap,
                                             size_t *len_out);

// Checks the solver's internal invariants.
//
// # Safety
// `solver` must be a live handle.
enum DynlabelStatus dynlabel_solver_check(struct DynlabelSolver *solver);

// Message of the last failed call on `solver`, empty if none. The pointer
// stays valid until the next call on the handle.
//
// # Safety
// `solver` must be null or a live handle.
const char *dynlabel_solver_last_error(const struct DynlabelSolver *solver);

// Static name of a status code.
const char *dynlabel_status_name(enum DynlabelStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNLABEL_H */
