#ifndef NAVMINE_H
#define NAVMINE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum NavmineStatus {
  NAVMINE_STATUS_OK = 0,
  NAVMINE_STATUS_NULL_ARGUMENT = 1,
  NAVMINE_STATUS_INVALID_UTF8 = 2,
  NAVMINE_STATUS_INVALID_JSON = 3,
  NAVMINE_STATUS_INVALID_ARGUMENT = 4,
  NAVMINE_STATUS_UNKNOWN_LABEL = 5,
  NAVMINE_STATUS_UNPARSEABLE_REPLY = 6,
  NAVMINE_STATUS_INTERNAL = 7,
} NavmineStatus;

/**
 * Opaque labeled element layout.
 */
typedef struct NavmineLayout NavmineLayout;

/**
 * Opaque list of OCR tokens for one frame.
 */
typedef struct NavmineTokenList NavmineTokenList;

/**
 * Axis-aligned box in normalized screen coordinates.
 */
typedef struct NavmineBox {
  double x0;
  double y0;
  double x1;
  double y1;
} NavmineBox;

typedef struct NavmineF1 {
  double precision;
  double recall;
  double f1;
  size_t true_positives;
  size_t false_positives;
  size_t false_negatives;
} NavmineF1;

typedef struct NavminePoint {
  double x;
  double y;
} NavminePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread; empty after a success.
 * Valid until the next navmine call on the same thread.
 */
const char *navmine_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *navmine_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from a navmine out-parameter and not be freed twice.
 */
void navmine_string_free(char *s);

/**
 * Character-level edit distance between two UTF-8 strings.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated; `out` must be writable.
 */
enum NavmineStatus navmine_levenshtein(const char *a, const char *b, size_t *out);

/**
 * Intersection over union of two valid boxes.
 *
 * # Safety
 * Pointers must be valid for reads (`a`, `b`) and writes (`out`).
 */
enum NavmineStatus navmine_iou(const struct NavmineBox *a, const struct NavmineBox *b, double *out);

/**
 * Bitmask of the refinement zones containing height `y`: bit 0 is zone 1.
 *
 * # Safety
 * `out` must be writable.
 */
enum NavmineStatus navmine_zones_containing(double y, uint8_t *out);

/**
 * New empty token list. Never null.
 */
struct NavmineTokenList *navmine_tokens_new(void);

/**
 * Appends an OCR token.
 *
 * # Safety
 * `list` must come from [`navmine_tokens_new`]; `text` must be
 * NUL-terminated; `bbox` must be readable.
 */
enum NavmineStatus navmine_tokens_push(struct NavmineTokenList *list,
                                       const char *text,
                                       const struct NavmineBox *bbox,
                                       double confidence);

/**
 * Number of tokens in `list`; 0 for null.
 *
 * # Safety
 * `list` must be null or come from [`navmine_tokens_new`].
 */
size_t navmine_tokens_len(const struct NavmineTokenList *list);

/**
 * # Safety
 * `list` must be null or come from [`navmine_tokens_new`], freed once.
 */
void navmine_tokens_free(struct NavmineTokenList *list);

/**
 * Change ratio between two frames' tokens, as used for transition
 * detection. Tokens are compared as given, without confidence filtering.
 *
 * # Safety
 * Both lists must come from [`navmine_tokens_new`]; `out` must be writable.
 */
enum NavmineStatus navmine_change_ratio(const struct NavmineTokenList *prev,
                                        const struct NavmineTokenList *next,
                                        double location_tolerance,
                                        double *out);

/**
 * Runs transition detection on a JSON array of OCR frames. `params_json`
 * may be null for the defaults or hold a partial parameter object. The
 * report is written to `out_json`.
 *
 * # Safety
 * Strings must be NUL-terminated; `out_json` must be writable.
 */
enum NavmineStatus navmine_detect_transitions_json(const char *frames_json,
                                                   const char *params_json,
                                                   char **out_json);

/**
 * Precision, recall and F1 of predicted against true transition times.
 *
 * # Safety
 * Arrays must hold the given number of values (null is allowed when the
 * count is 0); `out` must be writable.
 */
enum NavmineStatus navmine_transition_f1(const double *predicted,
                                         size_t n_predicted,
                                         const double *truth,
                                         size_t n_truth,
                                         double tolerance_s,
                                         struct NavmineF1 *out);

/**
 * Parses a model reply. The result is JSON: `{"element": {"kind", "label"}}`
 * for an element still to be localized, `{"action": {...}}` otherwise.
 *
 * # Safety
 * `reply` must be NUL-terminated; `out_json` must be writable.
 */
enum NavmineStatus navmine_parse_action(const char *reply, char **out_json);

/**
 * Loads a layout from its JSON form, as stored in `layouts.json`.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum NavmineStatus navmine_layout_from_json(const char *json, struct NavmineLayout **out);

/**
 * Number of elements; 0 for null.
 *
 * # Safety
 * `layout` must be null or come from [`navmine_layout_from_json`].
 */
size_t navmine_layout_len(const struct NavmineLayout *layout);

/**
 * Center of the element carrying `label`.
 *
 * # Safety
 * `layout` must come from [`navmine_layout_from_json`]; `out` must be writable.
 */
enum NavmineStatus navmine_layout_resolve(const struct NavmineLayout *layout,
                                          uint32_t label,
                                          struct NavminePoint *out);

/**
 * Whether any element's center lies inside `region`.
 *
 * # Safety
 * `layout` must come from [`navmine_layout_from_json`]; `region` readable,
 * `out` writable.
 */
enum NavmineStatus navmine_layout_hit_test(const struct NavmineLayout *layout,
                                           const struct NavmineBox *region,
                                           bool *out);

/**
 * # Safety
 * `layout` must be null or come from [`navmine_layout_from_json`], freed once.
 */
void navmine_layout_free(struct NavmineLayout *layout);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NAVMINE_H */
