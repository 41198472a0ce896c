#ifndef NIC_MEASURE_H
#define NIC_MEASURE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every exported function.
 */
typedef enum NicStatus {
  NIC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NIC_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  NIC_STATUS_INVALID_UTF8 = 2,
  /**
   * Input JSON was malformed or violated a format invariant.
   */
  NIC_STATUS_MALFORMED = 3,
  /**
   * The computation was rejected (missing node, bad formula, ...).
   */
  NIC_STATUS_REJECTED = 4,
  /**
   * Verification ran and found at least one failure.
   */
  NIC_STATUS_CHECK_FAILED = 5,
  /**
   * A panic was caught at the boundary; this is a bug.
   */
  NIC_STATUS_INTERNAL = 6,
} NicStatus;

/**
 * A finite fragment over a plan.
 */
typedef struct NicFragment NicFragment;

/**
 * A validated tree plan.
 */
typedef struct NicPlan NicPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *nic_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nic_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void nic_string_free(char *s);

/**
 * Parses and validates a plan file.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum NicStatus nic_plan_from_json(const char *json, struct NicPlan **out);

/**
 * Serializes a plan to the plan file format.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum NicStatus nic_plan_to_json(const struct NicPlan *plan, char **out);

/**
 * Releases a plan. Fragments built from it stay valid. Null is ignored.
 *
 * # Safety
 * `plan` must be null or a handle from this library, not yet freed.
 */
void nic_plan_free(struct NicPlan *plan);

/**
 * The fragment tcl(∅) over `plan`.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum NicStatus nic_fragment_new(const struct NicPlan *plan, struct NicFragment **out);

/**
 * A random fragment of at most `max_nodes` nodes, determined by `seed`.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum NicStatus nic_fragment_grow(const struct NicPlan *plan,
                                 uint64_t seed,
                                 uintptr_t max_nodes,
                                 struct NicFragment **out);

/**
 * Loads a fragment dump.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum NicStatus nic_fragment_from_json(const char *json, struct NicFragment **out);

/**
 * Dumps a fragment; the output loads back to an equal fragment.
 *
 * # Safety
 * `frag` must be a live handle; `out` must be writable.
 */
enum NicStatus nic_fragment_to_json(const struct NicFragment *frag, char **out);

/**
 * Number of nodes in the fragment.
 *
 * # Safety
 * `frag` must be a live handle; `out` must be writable.
 */
enum NicStatus nic_fragment_len(const struct NicFragment *frag, uintptr_t *out);

/**
 * Releases a fragment. Null is ignored.
 *
 * # Safety
 * `frag` must be null or a handle from this library, not yet freed.
 */
void nic_fragment_free(struct NicFragment *frag);

/**
 * h of a definable set whose parameters are nodes of `frag`, written as
 * `{"dim":d,"meas":"p/q"}`.
 *
 * # Safety
 * `frag` must be a live handle, `set_json` a NUL-terminated string and `out`
 * writable.
 */
enum NicStatus nic_measure_set(const struct NicFragment *frag, const char *set_json, char **out);

/**
 * The complete types making up a definable set, each with its value, and
 * the total: `{"types":[{"descriptor":…,"h":…}],"total":…}`.
 *
 * # Safety
 * As for [`nic_measure_set`].
 */
enum NicStatus nic_decompose(const struct NicFragment *frag, const char *set_json, char **out);

/**
 * Runs a verification suite (`cms`, `ms`, `nic`, `oracle` or `all`) on
 * fragments of at most `max_nodes` nodes grown from `seed`. The reports are
 * written to `out` as a JSON array (with `elapsed_ms` set to 0 so that the
 * output is deterministic) in both the `Ok` and the `CheckFailed` case.
 *
 * # Safety
 * `plan` must be a live handle, `suite` a NUL-terminated string and `out`
 * writable.
 */
enum NicStatus nic_verify(const struct NicPlan *plan,
                          const char *suite,
                          uint64_t seed,
                          uintptr_t max_nodes,
                          char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NIC_MEASURE_H */
