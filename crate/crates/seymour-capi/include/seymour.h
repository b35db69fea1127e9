#ifndef SEYMOUR_H
#define SEYMOUR_H

/* Generated from the Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which argument certified the returned witness.
 */
typedef enum SeymourProofPath {
  SEYMOUR_PROOF_PATH_SINK = 0,
  SEYMOUR_PROOF_PATH_MATCHING_PRIME = 1,
  SEYMOUR_PROOF_PATH_MATCHING_BLOCK = 2,
  SEYMOUR_PROOF_PATH_STAR_STABLE = 3,
  SEYMOUR_PROOF_PATH_STAR_PERIODIC = 4,
  SEYMOUR_PROOF_PATH_BRUTE_FORCE = 5,
} SeymourProofPath;

/**
 * Outcome of a call. Nonzero values match the CLI exit codes where a
 * counterpart exists.
 */
typedef enum SeymourStatus {
  SEYMOUR_STATUS_OK = 0,
  /**
   * Malformed input: bad text, bad arcs, unmet preconditions.
   */
  SEYMOUR_STATUS_INPUT_ERROR = 1,
  /**
   * The instance is too large for the exact algorithms.
   */
  SEYMOUR_STATUS_CAPABILITY_ERROR = 2,
  /**
   * A proved property failed to hold; indicates a bug.
   */
  SEYMOUR_STATUS_INVARIANT_VIOLATION = 3,
  /**
   * A probe of an open conjecture fired; inspect the error message.
   */
  SEYMOUR_STATUS_POTENTIAL_REFUTATION = 4,
  /**
   * A required pointer argument was null.
   */
  SEYMOUR_STATUS_NULL_ARGUMENT = 5,
} SeymourStatus;

/**
 * An oriented graph. Opaque: create with `seymour_graph_parse` or
 * `seymour_graph_from_arcs`, release with `seymour_graph_free`.
 */
typedef struct SeymourGraph SeymourGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message from the most recent failing call on this thread, as a
 * NUL-terminated string. Valid until the next failing call on the same
 * thread; empty if nothing failed yet. Never null.
 */
const char *seymour_last_error(void);

/**
 * A static name for a proof path, e.g. "matching-prime". Never null.
 */
const char *seymour_proof_path_name(enum SeymourProofPath path);

/**
 * Parses the line-oriented edge-list format (`n m` header, one `u v`
 * arc per line, `#` comments) into a new graph handle.
 *
 * # Safety
 * `text` must point to a NUL-terminated string.
 */
enum SeymourStatus seymour_graph_parse(const char *text, struct SeymourGraph **out);

/**
 * Builds a graph on `n` vertices from parallel tail/head arrays of
 * length `arc_count`.
 *
 * # Safety
 * `tails` and `heads` must point to `arc_count` readable elements (or be
 * unused when `arc_count` is 0).
 */
enum SeymourStatus seymour_graph_from_arcs(size_t n,
                                           const size_t *tails,
                                           const size_t *heads,
                                           size_t arc_count,
                                           struct SeymourGraph **out);

/**
 * Releases a graph handle. Accepts null.
 *
 * # Safety
 * `g`, when non-null, must come from a constructor of this library and
 * must not be used afterwards.
 */
void seymour_graph_free(struct SeymourGraph *g);

/**
 * Number of vertices; 0 for a null handle.
 *
 * # Safety
 * `g`, when non-null, must be a live handle from this library.
 */
size_t seymour_graph_vertex_count(const struct SeymourGraph *g);

/**
 * Number of arcs; 0 for a null handle.
 *
 * # Safety
 * `g`, when non-null, must be a live handle from this library.
 */
size_t seymour_graph_arc_count(const struct SeymourGraph *g);

/**
 * Finds one verified witness — a vertex with at least as many second
 * out-neighbors as out-neighbors — using the pipeline the graph's
 * missing-edge structure calls for. Writes the vertex and the argument
 * that certified it.
 *
 * # Safety
 * `g` must be a live handle; `witness` and `path` must be writable.
 */
enum SeymourStatus seymour_find_witness(const struct SeymourGraph *g,
                                        size_t *witness,
                                        enum SeymourProofPath *path);

/**
 * Lists every witness, verified by two independent neighborhood
 * implementations. Writes up to `cap` vertices into `buf` and always
 * stores the total count in `len`; call with `cap` 0 to size a buffer.
 *
 * # Safety
 * `g` must be a live handle; `buf` must hold `cap` writable elements;
 * `len` must be writable.
 */
enum SeymourStatus seymour_all_witnesses(const struct SeymourGraph *g,
                                         size_t *buf,
                                         size_t cap,
                                         size_t *len);

/**
 * Two distinct verified witnesses of a sinkless graph whose missing
 * edges form a matching.
 *
 * # Safety
 * `g` must be a live handle; `first` and `second` must be writable.
 */
enum SeymourStatus seymour_two_witnesses(const struct SeymourGraph *g,
                                         size_t *first,
                                         size_t *second);

/**
 * Exact maximum-value ordering of a tournament. `buf` must hold at
 * least `seymour_graph_vertex_count(g)` elements; the maximum number of
 * forward arcs lands in `value`.
 *
 * # Safety
 * `g` must be a live handle; `buf` must hold `cap` writable elements;
 * `value` must be writable.
 */
enum SeymourStatus seymour_median_order(const struct SeymourGraph *g,
                                        size_t *buf,
                                        size_t cap,
                                        uint64_t *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEYMOUR_H */
