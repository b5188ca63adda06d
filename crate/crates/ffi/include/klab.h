#ifndef KLAB_H
#define KLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Bucket value for "infinitely many".
#define KLAB_INFINITE -1

typedef enum KlabKind {
  KLAB_KIND_ELLIPTIC = 0,
  KLAB_KIND_PARABOLIC = 1,
  KLAB_KIND_LOXODROMIC = 2,
} KlabKind;

typedef enum KlabStatus {
  KLAB_STATUS_OK = 0,
  KLAB_STATUS_NULL_POINTER = 1,
  KLAB_STATUS_INVALID_INPUT = 2,
  KLAB_STATUS_BAD_PARAMETERS = 3,
  KLAB_STATUS_SINGULAR = 4,
  KLAB_STATUS_NUMERICAL = 5,
  KLAB_STATUS_CAP_EXCEEDED = 6,
  KLAB_STATUS_IO = 7,
  KLAB_STATUS_PANIC = 8,
} KlabStatus;

// Opaque group handle.
typedef struct KlabGroup KlabGroup;

// Opaque report handle.
typedef struct KlabReport KlabReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after success.
// The pointer stays valid until the next klab call on this thread.
const char *klab_last_error(void);

// Parses a group spec from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum KlabStatus klab_group_from_json(const char *json, struct KlabGroup **out);

// Builds a gallery example, with its stated buckets as expectations.
//
// # Safety
// `id` must be a NUL-terminated string; `out` must be writable.
enum KlabStatus klab_gallery_group(const char *id, struct KlabGroup **out);

// Number of generators of a group.
//
// # Safety
// `group` must come from this library; `out` must be writable.
enum KlabStatus klab_group_generator_count(const struct KlabGroup *group, size_t *out);

// Serializes a group spec; free the string with `klab_string_free`.
//
// # Safety
// `group` must come from this library; `out` must be writable.
enum KlabStatus klab_group_to_json(const struct KlabGroup *group, char **out);

// # Safety
// `group` must come from this library and not be used afterwards.
void klab_group_free(struct KlabGroup *group);

// Runs all estimators. `radius` 0 selects the group's default (10, or
// the gallery entry's radius).
//
// # Safety
// `group` must come from this library; `out` must be writable.
enum KlabStatus klab_run(const struct KlabGroup *group, uint32_t radius, struct KlabReport **out);

// Census buckets of a report: counts, 0, or `KLAB_INFINITE`.
//
// # Safety
// `report` must come from this library; `li` and `lig` must be writable.
enum KlabStatus klab_report_buckets(const struct KlabReport *report, int32_t *li, int32_t *lig);

// Counts of detected Λ lines and census vertices.
//
// # Safety
// `report` must come from this library; outputs must be writable.
enum KlabStatus klab_report_counts(const struct KlabReport *report,
                                   size_t *lines,
                                   size_t *vertices);

// Verdict against expectations: 0 pass or none given, 1 mismatch,
// 3 ambiguous (the CLI exit codes).
//
// # Safety
// `report` must come from this library; `out` must be writable.
enum KlabStatus klab_report_outcome(const struct KlabReport *report, int32_t *out);

// The full report as JSON; free the string with `klab_string_free`.
//
// # Safety
// `report` must come from this library; `out` must be writable.
enum KlabStatus klab_report_json(const struct KlabReport *report, char **out);

// # Safety
// `report` must come from this library and not be used afterwards.
void klab_report_free(struct KlabReport *report);

// Classifies the projective map of a 3×3 matrix given as 18 doubles,
// (re, im) pairs in row-major order. `moduli` receives the eigenvalue
// moduli of the unit-determinant lift, ascending.
//
// # Safety
// `entries` must point to 18 doubles, `moduli` to 3 writable doubles.
enum KlabStatus klab_classify(const double *entries,
                              enum KlabKind *kind,
                              bool *diagonalizable,
                              double *moduli);

// # Safety
// `s` must be a string returned by this library, or null.
void klab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KLAB_H */
