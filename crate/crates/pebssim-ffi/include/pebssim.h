#ifndef PEBSSIM_H
#define PEBSSIM_H

/* Generated by cbindgen from pebssim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible API call.
 */
typedef enum PebssimStatus {
  PEBSSIM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PEBSSIM_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  PEBSSIM_STATUS_INVALID_UTF8 = 2,
  /**
   * Configuration rejected by validation.
   */
  PEBSSIM_STATUS_INVALID_CONFIG = 3,
  /**
   * File could not be read or written.
   */
  PEBSSIM_STATUS_IO = 4,
  /**
   * Dump file failed parsing or validation.
   */
  PEBSSIM_STATUS_BAD_DUMP = 5,
  /**
   * Simulation pipeline failed.
   */
  PEBSSIM_STATUS_SIM_FAILED = 6,
  /**
   * Index argument out of range.
   */
  PEBSSIM_STATUS_OUT_OF_RANGE = 7,
  /**
   * A panic was caught at the boundary (library bug).
   */
  PEBSSIM_STATUS_PANIC = 8,
} PebssimStatus;

/**
 * Opaque handle to a loaded trace dump.
 */
typedef struct PebssimDump PebssimDump;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the calling thread's most recent failure, or null if
 * none occurred. Free with `pebssim_string_free`.
 */
char *pebssim_last_error(void);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must have been returned by a pebssim function and not yet freed.
 */
void pebssim_string_free(char *s);

/**
 * Static library version string; do not free.
 */
const char *pebssim_version(void);

/**
 * Run a simulation described by a TOML document (the same schema as the CLI
 * `--config` file) and write the dump to `dump_path`.
 *
 * # Safety
 * `config_toml` and `dump_path` must be NUL-terminated strings.
 */
enum PebssimStatus pebssim_simulate_toml(const char *config_toml, const char *dump_path);

/**
 * Open and validate a dump file, returning a handle through `out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum PebssimStatus pebssim_dump_open(const char *path, struct PebssimDump **out);

/**
 * Release a dump handle. Null is a no-op.
 *
 * # Safety
 * `dump` must have come from `pebssim_dump_open` and not yet been closed.
 */
void pebssim_dump_close(struct PebssimDump *dump);

/**
 * Number of per-thread sections in the dump.
 *
 * # Safety
 * `dump` must be a live handle and `out` a valid pointer.
 */
enum PebssimStatus pebssim_dump_thread_count(const struct PebssimDump *dump, uint64_t *out);

/**
 * Total harvested records across all threads.
 *
 * # Safety
 * `dump` must be a live handle and `out` a valid pointer.
 */
enum PebssimStatus pebssim_dump_total_records(const struct PebssimDump *dump, uint64_t *out);

/**
 * Total harvest batches across all threads.
 *
 * # Safety
 * `dump` must be a live handle and `out` a valid pointer.
 */
enum PebssimStatus pebssim_dump_total_batches(const struct PebssimDump *dump, uint64_t *out);

/**
 * Number of mapping events recorded in the dump.
 *
 * # Safety
 * `dump` must be a live handle and `out` a valid pointer.
 */
enum PebssimStatus pebssim_dump_mapping_count(const struct PebssimDump *dump, uint64_t *out);

/**
 * Reset value the run was configured with.
 *
 * # Safety
 * `dump` must be a live handle and `out` a valid pointer.
 */
enum PebssimStatus pebssim_dump_reset(const struct PebssimDump *dump, uint64_t *out);

/**
 * Records per threshold interrupt the run was configured with.
 *
 * # Safety
 * `dump` must be a live handle and `out` a valid pointer.
 */
enum PebssimStatus pebssim_dump_threshold_records(const struct PebssimDump *dump, uint64_t *out);

/**
 * Per-thread accessors: id and records dropped by the harvest ring for the
 * thread at `index` (0-based, in dump order).
 *
 * # Safety
 * `dump` must be a live handle; `out_id` and `out_dropped` valid pointers.
 */
enum PebssimStatus pebssim_dump_thread_info(const struct PebssimDump *dump,
                                            uint64_t index,
                                            uint64_t *out_id,
                                            uint64_t *out_dropped);

/**
 * Analyze an open dump: write the CSV/SVG artifact set, summary, and
 * manifest into `out_dir` using default thresholds, with file names derived
 * from `stem`.
 *
 * # Safety
 * `dump` must be a live handle; `stem` and `out_dir` NUL-terminated strings.
 */
enum PebssimStatus pebssim_dump_analyze(const struct PebssimDump *dump,
                                        const char *stem,
                                        const char *out_dir);

/**
 * Estimated fraction of CPU time spent in the sampling interrupt handler.
 * Pure function of the arguments; returns a negative value on invalid input
 * (zero `reset`/`threshold_records` or non-positive `cpu_hz`).
 */
double pebssim_overhead_estimate(uint64_t reset,
                                 uint64_t threshold_records,
                                 uint64_t handler_cycles,
                                 double miss_rate,
                                 double cpu_hz);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEBSSIM_H */
