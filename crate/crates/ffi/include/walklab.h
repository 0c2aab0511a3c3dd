#ifndef WALKLAB_H
#define WALKLAB_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WlPolicyKind {
  WL_POLICY_KIND_SRW = 0,
  WL_POLICY_KIND_RWC = 1,
  WL_POLICY_KIND_ERWC = 2,
} WlPolicyKind;

typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_INVALID_ARGUMENT = 1,
  WL_STATUS_PARSE = 2,
  WL_STATUS_GENERATION_FAILURE = 3,
  WL_STATUS_CAP_EXCEEDED = 4,
  WL_STATUS_TOO_LARGE = 5,
  WL_STATUS_DISCONNECTED = 6,
  WL_STATUS_STUCK_WALK = 7,
  WL_STATUS_NULL_POINTER = 8,
  WL_STATUS_INTERNAL = 9,
} WlStatus;

/**
 * Opaque graph handle.
 */
typedef struct WlGraph WlGraph;

/**
 * Walk policy. `d` is ignored for SRW; `h_num / h_den` only matters for
 * ERWC and must exceed 1. `sampling_with_replacement` and
 * `rwc_score_plus_one` select the alternative rule variants.
 */
typedef struct WlPolicy {
  enum WlPolicyKind kind;
  uint32_t d;
  uint64_t h_num;
  uint64_t h_den;
  bool sampling_with_replacement;
  bool rwc_score_plus_one;
} WlPolicy;

/**
 * Result of one walk. When the step cap is hit, `covered` is less than the
 * node count and `cover_steps` equals the cap.
 */
typedef struct WlRunSummary {
  uint64_t cover_steps;
  uint64_t max_node_load;
  uint64_t covered;
} WlRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wl_last_error_message(void);

/**
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum WlStatus wl_graph_torus(uintptr_t rows, uintptr_t cols, struct WlGraph **out);

/**
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum WlStatus wl_graph_complete(uintptr_t n, struct WlGraph **out);

/**
 * Connected random geometric graph on the unit square, resampled up to
 * `max_retries` times.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum WlStatus wl_graph_rgg(uintptr_t n,
                           double radius,
                           uint64_t seed,
                           uint32_t max_retries,
                           struct WlGraph **out);

/**
 * Parses an edge list: a `n m` header line followed by `m` lines `u v`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writing.
 */
enum WlStatus wl_graph_from_edge_list(const char *text, struct WlGraph **out);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `g` must come from a `wl_graph_*` constructor and not be used afterwards.
 */
void wl_graph_free(struct WlGraph *g);

/**
 * Node count, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
uintptr_t wl_graph_node_count(const struct WlGraph *g);

/**
 * Edge count, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
uintptr_t wl_graph_edge_count(const struct WlGraph *g);

/**
 * Serializes a graph as an edge list. Release the string with
 * [`wl_string_free`].
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be valid for writing.
 */
enum WlStatus wl_graph_to_edge_list(const struct WlGraph *g, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void wl_string_free(char *s);

/**
 * `sqrt(ln n / (pi n))`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum WlStatus wl_connectivity_radius(uintptr_t n, double *out);

/**
 * Runs one walk from `start` until every node is visited. `step_cap` 0
 * means `10000 * n`. On `WL_STATUS_CAP_EXCEEDED` the summary still
 * describes the partial run.
 *
 * # Safety
 * `g` must be a live graph handle; `policy` and `out` must be valid.
 */
enum WlStatus wl_run_replicate(const struct WlGraph *g,
                               const struct WlPolicy *policy,
                               uintptr_t start,
                               uint64_t seed,
                               uint64_t step_cap,
                               struct WlRunSummary *out);

/**
 * Exact expected SRW cover steps from `start` (graphs up to 20 nodes).
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be valid for writing.
 */
enum WlStatus wl_exact_cover_expectation(const struct WlGraph *g, uintptr_t start, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WALKLAB_H */
