#ifndef TOKENNET_H
#define TOKENNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum TnStatus {
  TN_STATUS_OK = 0,
  TN_STATUS_NULL_POINTER = 1,
  TN_STATUS_INVALID_ARGUMENT = 2,
  TN_STATUS_BUFFER_TOO_SMALL = 3,
  TN_STATUS_GRAPH = 4,
  TN_STATUS_IO = 5,
  TN_STATUS_FEATURE = 6,
  TN_STATUS_CORE = 7,
  TN_STATUS_PANIC = 8,
} TnStatus;

/**
 * Null model used by the core significance test.
 */
typedef enum TnNullModel {
  TN_NULL_MODEL_GNM = 0,
  TN_NULL_MODEL_DEGREE_PRESERVING = 1,
} TnNullModel;

/**
 * All cached days of one token, ascending by date.
 */
typedef struct TnDataset TnDataset;

/**
 * One day's transfer graph.
 */
typedef struct TnGraph TnGraph;

/**
 * The four topology features.
 */
typedef struct TnTopology {
  size_t n_components;
  double largest_component_ratio;
  double modularity;
  double degree_centrality_std;
} TnTopology;

typedef struct TnCoreConfig {
  uint32_t replicates;
  uint32_t swaps_per_edge;
  double alpha;
  uint64_t seed;
  enum TnNullModel null_model;
  /**
   * Run the significance test; otherwise the day counts as not significant.
   */
  bool run_test;
} TnCoreConfig;

/**
 * Core-periphery outcome. `p_value` is meaningful only when `has_p_value`.
 */
typedef struct TnCoreResult {
  size_t n_core;
  double avg_core_degree;
  uint64_t z_error;
  bool has_p_value;
  double p_value;
  bool significant;
} TnCoreResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 *
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *tn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tn_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tn_string_free(char *s);

/**
 * Builds a graph on nodes `0..node_count` from `edge_count` pairs stored
 * flat in `edges` (`edges[2i]`, `edges[2i+1]`). Every node needs an edge;
 * nodes get synthetic addresses in index order.
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable values; `out` must be writable.
 */
enum TnStatus tn_graph_from_edges(int32_t year,
                                  uint32_t month,
                                  uint32_t day,
                                  size_t node_count,
                                  const uint32_t *edges,
                                  size_t edge_count,
                                  struct TnGraph **out);

/**
 * # Safety
 * `graph` must come from [`tn_graph_from_edges`] and not have been freed. Null is ignored.
 */
void tn_graph_free(struct TnGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null (returns 0).
 */
size_t tn_graph_node_count(const struct TnGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null (returns 0).
 */
size_t tn_graph_edge_count(const struct TnGraph *graph);

/**
 * Address of `node` as a `0x…` string, to be freed with [`tn_string_free`].
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum TnStatus tn_graph_address(const struct TnGraph *graph, uint32_t node, char **out);

/**
 * Loads every cached day from a dataset directory written by `tokennet ingest`.
 *
 * # Safety
 * `dir` must be a NUL-terminated UTF-8 path; `out` must be writable.
 */
enum TnStatus tn_dataset_load(const char *dir, struct TnDataset **out);

/**
 * # Safety
 * `dataset` must come from [`tn_dataset_load`] and not have been freed. Null is ignored.
 */
void tn_dataset_free(struct TnDataset *dataset);

/**
 * # Safety
 * `dataset` must be a live handle or null (returns 0).
 */
size_t tn_dataset_len(const struct TnDataset *dataset);

/**
 * Borrowed graph of day `index`, valid while the dataset lives; null when out of range.
 *
 * # Safety
 * `dataset` must be a live handle or null.
 */
const struct TnGraph *tn_dataset_graph(const struct TnDataset *dataset, size_t index);

/**
 * Components, largest-component ratio, modularity and degree-centrality spread.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum TnStatus tn_topology(const struct TnGraph *graph,
                          uint64_t community_seed,
                          struct TnTopology *out);

/**
 * Default core configuration: 100 replicates, 10 swaps per edge, alpha 0.05,
 * seed 0, G(n,m) null, test enabled.
 */
struct TnCoreConfig tn_core_config_default(void);

/**
 * Detects the core and optionally tests its significance.
 *
 * # Safety
 * `graph` and `config` must be valid; `out` must be writable.
 */
enum TnStatus tn_core_periphery(const struct TnGraph *graph,
                                const struct TnCoreConfig *config,
                                struct TnCoreResult *out);

/**
 * Writes the core's node indices (highest degree first) into `buf`.
 *
 * `*len` always receives the core size; if it exceeds `cap` nothing is
 * written and `BufferTooSmall` is returned. `buf` may be null when `cap` is 0.
 *
 * # Safety
 * `buf` must have room for `cap` values; `len` must be writable.
 */
enum TnStatus tn_core_nodes(const struct TnGraph *graph, uint32_t *buf, size_t cap, size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOKENNET_H */
