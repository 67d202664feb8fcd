#ifndef DFDRIFT_H
#define DFDRIFT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * How traces are flattened into a stream.
 */
typedef enum DfdOrdering {
  DFD_ORDERING_TRACE_MAJOR = 0,
  DFD_ORDERING_TIMESTAMP = 1,
} DfdOrdering;

/**
 * Result of every fallible call.
 */
typedef enum DfdStatus {
  DFD_STATUS_OK = 0,
  DFD_STATUS_NULL_ARGUMENT = 1,
  DFD_STATUS_INVALID_ARGUMENT = 2,
  DFD_STATUS_PARSE = 3,
  DFD_STATUS_STREAM_TOO_SHORT = 4,
  DFD_STATUS_IO = 5,
  DFD_STATUS_OUT_OF_RANGE = 6,
  DFD_STATUS_INTERNAL = 7,
} DfdStatus;

typedef enum DfdDirection {
  DFD_DIRECTION_FORWARD = 0,
  DFD_DIRECTION_BACKWARD = 1,
} DfdDirection;

/**
 * An event log under construction or parsed from a file.
 */
typedef struct DfdLog DfdLog;

/**
 * The outcome of one detection run.
 */
typedef struct DfdReport DfdReport;

typedef struct DfdConfig {
  size_t window_size;
  /**
   * 0 selects `window_size / 2`.
   */
  size_t consecutive_tests;
  double p_threshold;
  double asr_threshold;
  enum DfdOrdering ordering;
} DfdConfig;

typedef struct DfdDriftPoint {
  size_t event_index;
  size_t trace_index;
  enum DfdDirection direction;
  /**
   * Milliseconds since the Unix epoch; meaningful when `has_timestamp`.
   */
  int64_t timestamp_ms;
  bool has_timestamp;
  /**
   * True when a point of the other direction was merged into this one.
   */
  bool merged;
} DfdDriftPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *dfd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dfd_version(void);

/**
 * Default configuration for `window_size`: `window_size / 2` consecutive
 * tests, p < 0.05, residual > 1.96, trace-major ordering.
 */
struct DfdConfig dfd_config_default(size_t window_size);

/**
 * Creates an empty log.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum DfdStatus dfd_log_new(struct DfdLog **out);

/**
 * Appends an event to the trace `trace_id`, creating the trace at the end
 * of the log if it does not exist yet.
 *
 * # Safety
 * `log` must be a live handle; strings must be NUL-terminated.
 */
enum DfdStatus dfd_log_push_event(struct DfdLog *log,
                                  const char *trace_id,
                                  const char *activity,
                                  int64_t timestamp_ms,
                                  bool has_timestamp);

/**
 * Parses an XES document held in memory.
 *
 * # Safety
 * `data` must point to `len` bytes; `out` must be valid.
 */
enum DfdStatus dfd_log_from_xes(const uint8_t *data, size_t len, struct DfdLog **out);

/**
 * Parses a CSV document held in memory. A null column name selects the
 * default (`case_id`, `activity`, `timestamp`).
 *
 * # Safety
 * `data` must point to `len` bytes; column names must be null or
 * NUL-terminated; `out` must be valid.
 */
enum DfdStatus dfd_log_from_csv(const uint8_t *data,
                                size_t len,
                                const char *case_column,
                                const char *activity_column,
                                const char *timestamp_column,
                                struct DfdLog **out);

/**
 * Reads and parses a log file; `.csv` files are read as CSV with default
 * columns, anything else as XES.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be valid.
 */
enum DfdStatus dfd_log_from_file(const char *path, struct DfdLog **out);

/**
 * Number of traces; 0 for a null handle.
 *
 * # Safety
 * `log` must be null or a live handle.
 */
size_t dfd_log_num_traces(const struct DfdLog *log);

/**
 * Number of events; 0 for a null handle.
 *
 * # Safety
 * `log` must be null or a live handle.
 */
size_t dfd_log_num_events(const struct DfdLog *log);

/**
 * # Safety
 * `log` must be null or a handle not freed before.
 */
void dfd_log_free(struct DfdLog *log);

/**
 * Runs forward and backward detection and merges the results.
 *
 * # Safety
 * `log` must be a live handle, `config` and `out` valid pointers.
 */
enum DfdStatus dfd_detect(const struct DfdLog *log,
                          const struct DfdConfig *config,
                          struct DfdReport **out);

/**
 * Number of merged drift points; 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t dfd_report_num_points(const struct DfdReport *report);

/**
 * Copies merged drift point `index` into `out`.
 *
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum DfdStatus dfd_report_point(const struct DfdReport *report,
                                size_t index,
                                struct DfdDriftPoint *out);

/**
 * Mean wall-clock milliseconds per event of the run; NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double dfd_report_mean_ms_per_event(const struct DfdReport *report);

/**
 * The full report as JSON. Release the string with [`dfd_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum DfdStatus dfd_report_to_json(const struct DfdReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a handle not freed before.
 */
void dfd_report_free(struct DfdReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not freed before.
 */
void dfd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DFDRIFT_H */
