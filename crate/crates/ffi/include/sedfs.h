#ifndef SEDFS_H
#define SEDFS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SedfsAlgorithm {
  SEDFS_ALGORITHM_EP = 0,
  SEDFS_ALGORITHM_NAIVE = 1,
  SEDFS_ALGORITHM_EB = 2,
  SEDFS_ALGORITHM_IN_MEM = 3,
} SedfsAlgorithm;

typedef enum SedfsStatus {
  SEDFS_STATUS_OK = 0,
  SEDFS_STATUS_NULL_ARGUMENT = 1,
  SEDFS_STATUS_INVALID_ARGUMENT = 2,
  SEDFS_STATUS_IO = 3,
  SEDFS_STATUS_FORMAT = 4,
  SEDFS_STATUS_BATCH_OVERFLOW = 5,
  SEDFS_STATUS_IRREDUCIBLE_BATCH = 6,
  SEDFS_STATUS_TIME_LIMIT = 7,
  SEDFS_STATUS_BUDGET = 8,
  SEDFS_STATUS_INTERNAL = 9,
  SEDFS_STATUS_PANIC = 10,
} SedfsStatus;

// A finished run.
typedef struct SedfsRun SedfsRun;

// Run settings. Start from [`sedfs_options_default`].
typedef struct SedfsOptions {
  enum SedfsAlgorithm algorithm;
  double gamma;
  // Edges per batch; 0 means the node count.
  uint32_t budget_edges;
  // Seconds; 0 disables the limit.
  double time_limit_secs;
  // Root node; negative uses the header root or adds a virtual root.
  int64_t root;
} SedfsOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct SedfsOptions sedfs_options_default(void);

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *sedfs_last_error_message(void);

// Runs one algorithm with default settings.
//
// # Safety
// `graph_path` is a NUL-terminated string; `out` points to writable storage.
enum SedfsStatus sedfs_run_new(const char *graph_path,
                               enum SedfsAlgorithm algorithm,
                               struct SedfsRun **out);

// # Safety
// `graph_path` is a NUL-terminated string, `options` points to a valid
// [`SedfsOptions`] and `out` to writable storage.
enum SedfsStatus sedfs_run_new_with(const char *graph_path,
                                    const struct SedfsOptions *options,
                                    struct SedfsRun **out);

// # Safety
// `run` is null or a handle from `sedfs_run_new*` not yet freed.
void sedfs_run_free(struct SedfsRun *run);

// Nodes in the result, a virtual root included; 0 for null.
//
// # Safety
// `run` is null or a live handle.
uint32_t sedfs_run_node_count(const struct SedfsRun *run);

// Node ids in depth-first order. Valid while the handle lives.
//
// # Safety
// `run` is null or a live handle; `len` is null or writable.
const uint32_t *sedfs_run_order(const struct SedfsRun *run, size_t *len);

// Parent of every node by id; the root's entry is [`SEDFS_NO_PARENT`].
//
// # Safety
// `run` is null or a live handle; `len` is null or writable.
const uint32_t *sedfs_run_parents(const struct SedfsRun *run, size_t *len);

// Hex SHA-256 of the order and parent arrays.
//
// # Safety
// `run` is null or a live handle.
const char *sedfs_run_digest(const struct SedfsRun *run);

// Main-loop iterations (ep, naive) or rounds (eb).
//
// # Safety
// `run` is null or a live handle.
uint32_t sedfs_run_iterations(const struct SedfsRun *run);

// # Safety
// `run` is null or a live handle.
uint64_t sedfs_run_bytes_read(const struct SedfsRun *run);

// # Safety
// `run` is null or a live handle.
uint64_t sedfs_run_peak_slots(const struct SedfsRun *run);

// Writes the order to `order_path` and the parents to `order_path` +
// ".parents".
//
// # Safety
// `run` is a live handle; `order_path` is a NUL-terminated string.
enum SedfsStatus sedfs_run_write(const struct SedfsRun *run, const char *order_path);

// # Safety
// `path` is a NUL-terminated string.
enum SedfsStatus sedfs_generate_er(const char *path, uint64_t n, uint64_t m, uint64_t seed);

// # Safety
// `path` is a NUL-terminated string.
enum SedfsStatus sedfs_generate_sf(const char *path, uint64_t n, uint64_t seed);

// Checks the artifact at `order_path` (parents next to it) against the
// graph. `valid` receives whether no forward cross edge exists.
//
// # Safety
// Both paths are NUL-terminated strings; `valid` is writable.
enum SedfsStatus sedfs_verify(const char *graph_path, const char *order_path, bool *valid);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEDFS_H */
