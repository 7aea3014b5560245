#ifndef CABSAT_H
#define CABSAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CabStatus {
  CAB_STATUS_OK = 0,
  CAB_STATUS_INVALID_INPUT = 1,
  CAB_STATUS_PARSE = 2,
  CAB_STATUS_UNDEFINED_OBJECTIVE = 3,
  CAB_STATUS_LOOKUP = 4,
  CAB_STATUS_NOT_APPLICABLE = 5,
  CAB_STATUS_ORACLE_CAP = 6,
  CAB_STATUS_BACKEND = 7,
  CAB_STATUS_INTEGRITY = 8,
  CAB_STATUS_IO = 9,
  CAB_STATUS_NULL_POINTER = 10,
  CAB_STATUS_PANIC = 11,
} CabStatus;

typedef enum CabOrder {
  CAB_ORDER_LINEAR = 0,
  CAB_ORDER_BFS = 1,
  CAB_ORDER_DFS = 2,
} CabOrder;

/**
 * Opaque graph handle.
 */
typedef struct CabGraph CabGraph;

/**
 * Opaque search result handle.
 */
typedef struct CabResult CabResult;

/**
 * Search settings. Zero in `lb`, `ub`, `time_limit_seconds` or
 * `memory_limit_mb` means "unset".
 */
typedef struct CabSolveOptions {
  size_t lb;
  size_t ub;
  size_t processes;
  enum CabOrder order;
  bool symmetry;
  bool verify_lb;
  double time_limit_seconds;
  uint64_t memory_limit_mb;
} CabSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *cab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cab_version(void);

/**
 * Empty graph on `n` vertices.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum CabStatus cab_graph_new(size_t n, struct CabGraph **out);

/**
 * Adds the undirected edge `{a, b}`. Self-loops and repeats are ignored.
 *
 * # Safety
 * `g` must be a live handle from this library.
 */
enum CabStatus cab_graph_add_edge(struct CabGraph *g, size_t a, size_t b);

/**
 * Parses edge-list text (`n m` header, then 1-based `u v` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum CabStatus cab_graph_from_edge_list(const char *text, struct CabGraph **out);

/**
 * Builds a graph from a generator spec such as `"caterpillar:5,4"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` writable.
 */
enum CabStatus cab_graph_generate(const char *spec, struct CabGraph **out);

/**
 * # Safety
 * `g` must be null or a live handle; it is invalid afterwards.
 */
void cab_graph_free(struct CabGraph *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
size_t cab_graph_num_vertices(const struct CabGraph *g);

/**
 * Number of distinct edges.
 *
 * # Safety
 * `g` must be a live handle.
 */
size_t cab_graph_num_edges(struct CabGraph *g);

/**
 * Minimum cyclic distance over the edges under `labels[v]` (1-based, a
 * permutation of `1..=n`).
 *
 * # Safety
 * `labels` must point to `len` values and `out` be writable.
 */
enum CabStatus cab_labeling_value(struct CabGraph *g,
                                  const size_t *labels,
                                  size_t len,
                                  size_t *out);

/**
 * Exact value by exhaustive search (small graphs only). If `witness` is not
 * null it receives `n` labels.
 *
 * # Safety
 * `out` must be writable; `witness` null or room for `n` values.
 */
enum CabStatus cab_oracle(struct CabGraph *g, size_t *out, size_t *witness);

/**
 * Defaults: bounds `[2, n/2]`, one process, linear order, symmetry breaking
 * on, lower bound verified, no limits.
 */
struct CabSolveOptions cab_solve_options_default(void);

/**
 * Runs the exact search with the built-in solver. `opts` may be null for
 * defaults.
 *
 * # Safety
 * `g` must be a live handle, `opts` null or valid, `out` writable.
 */
enum CabStatus cab_solve(struct CabGraph *g,
                         const struct CabSolveOptions *opts,
                         struct CabResult **out);

/**
 * # Safety
 * `r` must be null or a live handle; it is invalid afterwards.
 */
void cab_result_free(struct CabResult *r);

/**
 * Best feasible value found, or 0 if none.
 *
 * # Safety
 * `r` must be a live handle.
 */
size_t cab_result_k_opt(const struct CabResult *r);

/**
 * Whether the value is proven optimal.
 *
 * # Safety
 * `r` must be a live handle.
 */
bool cab_result_certified(const struct CabResult *r);

/**
 * Copies the best labeling into `labels` (room for `len` values). Fails
 * with `CAB_STATUS_INVALID_INPUT` if there is none or `len` is too small.
 *
 * # Safety
 * `r` must be a live handle and `labels` point to `len` writable values.
 */
enum CabStatus cab_result_labeling(const struct CabResult *r, size_t *labels, size_t len);

/**
 * Result as JSON; release with [`cab_string_free`]. Null on failure.
 *
 * # Safety
 * `r` must be a live handle.
 */
char *cab_result_to_json(const struct CabResult *r);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void cab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CABSAT_H */
