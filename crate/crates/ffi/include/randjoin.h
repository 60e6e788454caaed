#ifndef RANDJOIN_H
#define RANDJOIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of an `rj_*` call.
typedef enum RjStatus {
  RJ_STATUS_OK = 0,
  RJ_STATUS_NULL_POINTER = 1,
  RJ_STATUS_INVALID_ARGUMENT = 2,
  RJ_STATUS_PARSE = 3,
  RJ_STATUS_TOO_LARGE = 4,
  RJ_STATUS_CODING_FAILURE = 5,
  RJ_STATUS_INTERNAL = 6,
} RjStatus;

// Level schedule handle.
typedef struct RjSchedule RjSchedule;

// Partition system handle.
typedef struct RjSystem RjSystem;

// Finite tree handle.
typedef struct RjTree RjTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `rj_*` call on the same thread.
const char *rj_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *rj_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void rj_string_free(char *s);

// Builds a schedule from `n_levels` levels and densities `q_num[i]/q_den[i]`.
//
// # Safety
// The three arrays must hold `n_levels` elements; `out` must be writable.
enum RjStatus rj_schedule_new(const uint64_t *levels,
                              const uint64_t *q_num,
                              const uint64_t *q_den,
                              uintptr_t n_levels,
                              struct RjSchedule **out);

// Builds a schedule from a level kind (`exponential`, `nlogn`,
// `scaled-nlogn:<c>`, `custom:<l0,l1,..>`) with `q_n = 1/(n+1)²`.
//
// # Safety
// `kind` must be a NUL-terminated string; `out` must be writable.
enum RjStatus rj_schedule_from_kind(const char *kind, uintptr_t n_max, struct RjSchedule **out);

// # Safety
// `s` must be null or a live schedule handle.
void rj_schedule_free(struct RjSchedule *s);

// The horizon `N`, or 0 for a null handle.
//
// # Safety
// `s` must be null or a live schedule handle.
uintptr_t rj_schedule_horizon(const struct RjSchedule *s);

// Writes `ℓ_n` to `out`.
//
// # Safety
// `s` must be a live schedule handle; `out` must be writable.
enum RjStatus rj_schedule_level(const struct RjSchedule *s, uintptr_t n, uint64_t *out);

// Parses the canonical tree text (`L=<top>` then one leaf per line).
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum RjStatus rj_tree_parse(const char *text, struct RjTree **out);

// The full tree at `ℓ_N` minus a seeded random set of leaves of measure
// `budget_num / budget_den`.
//
// # Safety
// `s` must be a live schedule handle; `out` must be writable.
enum RjStatus rj_tree_generate(const struct RjSchedule *s,
                               uint64_t budget_num,
                               uint64_t budget_den,
                               uint64_t seed,
                               struct RjTree **out);

// Prunes `t` to the schedule densities into a new handle.
//
// # Safety
// `t` and `s` must be live handles; `out` must be writable.
enum RjStatus rj_tree_prune(const struct RjTree *t,
                            const struct RjSchedule *s,
                            struct RjTree **out);

// Writes the measure as `num / 2^exp` in lowest terms.
//
// # Safety
// `t` must be a live tree handle; both outputs must be writable.
enum RjStatus rj_tree_measure(const struct RjTree *t, uint64_t *num, uint32_t *exp);

// Number of leaves, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live tree handle.
uint64_t rj_tree_leaf_count(const struct RjTree *t);

// Canonical text form of the tree.
//
// # Safety
// `t` must be a live tree handle; `out` must be writable.
enum RjStatus rj_tree_to_text(const struct RjTree *t, char **out);

// # Safety
// `t` must be null or a live tree handle.
void rj_tree_free(struct RjTree *t);

// A uniformly random height-`height` system, deterministic in `seed`.
//
// # Safety
// `s` must be a live schedule handle; `out` must be writable.
enum RjStatus rj_system_sample(const struct RjSchedule *s,
                               uintptr_t height,
                               uint64_t seed,
                               struct RjSystem **out);

// The system named by the bit string `name` (characters `0` and `1`).
//
// # Safety
// `s` must be a live schedule handle; `name` a NUL-terminated string;
// `out` must be writable.
enum RjStatus rj_system_from_name(const struct RjSchedule *s,
                                  const char *name,
                                  struct RjSystem **out);

// Height of the system, or 0 for a null handle.
//
// # Safety
// `ps` must be null or a live system handle.
uintptr_t rj_system_height(const struct RjSystem *ps);

// Canonical text form of the system.
//
// # Safety
// `ps` must be a live system handle; `out` must be writable.
enum RjStatus rj_system_to_text(const struct RjSystem *ps, char **out);

// # Safety
// `ps` must be null or a live system handle.
void rj_system_free(struct RjSystem *ps);

// Encodes `z` from `(sigma0, tau0)` into a tree string written to `out_y`.
// Returns `CodingFailure` when a required class misses the tree.
//
// # Safety
// Handles must be live; strings NUL-terminated; `out_y` writable.
enum RjStatus rj_encode(const struct RjSystem *ps,
                        const struct RjTree *t,
                        const char *z,
                        const char *sigma0,
                        const char *tau0,
                        char **out_y);

// Recovers `z` from `y` using only the system.
//
// # Safety
// `ps` must be live; strings NUL-terminated; `out_z` writable.
enum RjStatus rj_decode(const struct RjSystem *ps,
                        const char *y,
                        const char *sigma0,
                        const char *tau0,
                        char **out_z);

// Writes the failure horizon `n₀` of `ps` on `t`, or -1 when the last
// level fails.
//
// # Safety
// Handles must be live; `out` writable.
enum RjStatus rj_find_n0(const struct RjSystem *ps, const struct RjTree *t, int64_t *out);

// Exact probability `C(N-K, d) / C(N, d)` as a string `p/q`.
//
// # Safety
// `out` must be writable.
enum RjStatus rj_hypergeom_zero_prob(uint64_t population,
                                     uint64_t marked,
                                     uint64_t draws,
                                     char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANDJOIN_H */
