/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef LINEHEAT_H
#define LINEHEAT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum LhStatus {
  LH_STATUS_OK = 0,
  LH_STATUS_NULL_POINTER = 1,
  LH_STATUS_INVALID_UTF8 = 2,
  LH_STATUS_PARSE_ERROR = 3,
  LH_STATUS_NOT_FOUND = 4,
  LH_STATUS_INVALID_ARGUMENT = 5,
  LH_STATUS_TRACK_ERROR = 6,
  LH_STATUS_PANIC = 7,
} LhStatus;

// Opaque streaming tracker.
typedef struct LhTracker LhTracker;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *lh_last_error_message(void);

// Library version as a static string.
const char *lh_version(void);

// # Safety
// `s` must be null or a string returned by this library.
void lh_string_free(char *s);

struct LhTracker *lh_tracker_new(void);

// # Safety
// `tracker` must be null or come from [`lh_tracker_new`] and not be used
// afterwards.
void lh_tracker_free(struct LhTracker *tracker);

// Feeds a chunk of `git log -p` output in the lineheat pretty format.
// Chunks may split lines anywhere.
//
// # Safety
// `tracker` must be valid; `data` must point to `len` readable bytes.
enum LhStatus lh_tracker_feed(struct LhTracker *tracker, const uint8_t *data, size_t len);

// Flushes the stream. Feeding after this fails.
//
// # Safety
// `tracker` must be valid.
enum LhStatus lh_tracker_finish(struct LhTracker *tracker);

// Number of live lines of `path`.
//
// # Safety
// `tracker` must be valid, `path` a NUL-terminated string, `out` writable.
enum LhStatus lh_tracker_line_count(const struct LhTracker *tracker, const char *path, size_t *out);

// Per-line report of `path` as CSV (line_number, content, mod_count,
// birth_ts, commit_hashes, timestamps). Free `*out` with [`lh_string_free`].
//
// # Safety
// `tracker` must be valid, `path` a NUL-terminated string, `out` writable.
enum LhStatus lh_tracker_report_csv(const struct LhTracker *tracker, const char *path, char **out);

// Number of pattern codes; valid codes are `0..lh_pattern_count()`.
int32_t lh_pattern_count(void);

// Static name of a pattern code, or null for an invalid code.
const char *lh_pattern_name(int32_t code);

// Classifies one before/after revision pair of a line in the file `path`.
// Writes a pattern code to `out`.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum LhStatus lh_classify_pair(const char *before,
                               const char *after,
                               int64_t ts_before,
                               int64_t ts_after,
                               const char *path,
                               int32_t *out);

// Chao1 richness estimate.
//
// # Safety
// `out` must be writable.
enum LhStatus lh_chao1(uint64_t s_obs, uint64_t f1, uint64_t f2, double *out);

// Cohen's kappa over two equally long arrays of integer labels.
//
// # Safety
// `a` and `b` must point to `n` readable values; `out` must be writable.
enum LhStatus lh_cohens_kappa(const int32_t *a, const int32_t *b, size_t n, double *out);

// Whether a committer identity looks like a bot under the default rules.
//
// # Safety
// `name` and `email` must be NUL-terminated; `out` must be writable.
enum LhStatus lh_is_bot(const char *name, const char *email, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINEHEAT_H */
