/* Generated by cbindgen from the probseg-ffi crate; do not edit. */

#ifndef PROBSEG_H
#define PROBSEG_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Segmentation algorithm selector for [`ProbsegConfig`].
typedef enum ProbsegAlgorithm {
  // Offline divide-and-conquer splitting at lowest-probability frames.
  PROBSEG_ALGORITHM_PDAC = 0,
  // Streaming length-triggered splitting at the longest pause.
  PROBSEG_ALGORITHM_PSTRM = 1,
  // Online threshold scan with a position-dependent closing filter.
  PROBSEG_ALGORITHM_PTHR = 2,
  // Threshold scan over a moving-average-smoothed stream.
  PROBSEG_ALGORITHM_PTHR_MA = 3,
} ProbsegAlgorithm;

// Outcome of a fallible call. `Ok` is zero; everything else names the
// failure class, and [`probseg_last_error_message`] carries the detail.
typedef enum ProbsegStatus {
  PROBSEG_STATUS_OK = 0,
  // A required pointer argument was NULL.
  PROBSEG_STATUS_NULL_ARGUMENT = 1,
  // A value or configuration violated its documented constraints.
  PROBSEG_STATUS_INVALID_ARGUMENT = 2,
  // An index or frame range lay outside the addressed object.
  PROBSEG_STATUS_OUT_OF_RANGE = 3,
  // A file's contents did not match its declared format.
  PROBSEG_STATUS_FORMAT_ERROR = 4,
  // Audio encoding this library does not process.
  PROBSEG_STATUS_UNSUPPORTED_AUDIO = 5,
  // Two objects with incompatible sampling geometry were combined.
  PROBSEG_STATUS_SPEC_MISMATCH = 6,
  // Noise calibration could not reach its targets.
  PROBSEG_STATUS_CALIBRATION_FAILED = 7,
  // Operating-system level I/O failure.
  PROBSEG_STATUS_IO_ERROR = 8,
  // A string argument was not valid UTF-8.
  PROBSEG_STATUS_INVALID_UTF8 = 9,
  // An internal invariant failed; the library state is still sound.
  PROBSEG_STATUS_PANIC = 10,
} ProbsegStatus;

// Opaque segment list handle.
typedef struct ProbsegSegments ProbsegSegments;

// Opaque probability stream handle.
typedef struct ProbsegStream ProbsegStream;

// Segmenter tuning in frame units. Obtain a baseline from
// [`probseg_config_default`] and adjust fields before calling
// [`probseg_segment`]; the call re-validates everything.
typedef struct ProbsegConfig {
  enum ProbsegAlgorithm algorithm;
  // Hard cap on emitted segment length, frames. Must be at least 1.
  uint64_t max_frames;
  // Minimum useful segment length, frames.
  uint64_t min_frames;
  // Frame offset where the closing filter finishes ramping up to
  // `threshold`. Must satisfy min ≤ lerp_min ≤ lerp_max ≤ max.
  uint64_t lerp_min_frames;
  // Frame offset where the closing filter starts ramping toward 1.
  uint64_t lerp_max_frames;
  // Opening / splitting threshold, strictly between 0 and 1.
  double threshold;
  // Moving-average window, frames; read only by the smoothed scan.
  uint64_t smoothing_frames;
} ProbsegConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never NULL, never
// freed by the caller.
const char *probseg_version(void);

// Message for this thread's most recent failure, as a NUL-terminated
// string owned by the library. Empty (not NULL) before the first failure;
// overwritten by the next failing call on the same thread.
const char *probseg_last_error_message(void);

// Build a probability stream from `len` per-frame probabilities in
// `[0, 1]`. `recording_id` may be NULL for an anonymous stream. On
// `PROBSEG_STATUS_OK`, `*out` owns the stream; release it with
// [`probseg_stream_free`].
//
// # Safety
// `probs` must point to `len` readable floats (it may be NULL only when
// `len` is 0); `recording_id` must be NULL or NUL-terminated; `out` must
// be a valid pointer.
enum ProbsegStatus probseg_stream_new(const float *probs,
                                      size_t len,
                                      uint32_t sample_rate,
                                      uint32_t frame_stride,
                                      const char *recording_id,
                                      struct ProbsegStream **out);

// Load a probability stream from a `.probs` (binary, with sidecar
// metadata) or `.txt` file, exactly as the CLI would.
//
// # Safety
// `path` must be NUL-terminated; `out` must be a valid pointer.
enum ProbsegStatus probseg_stream_from_file(const char *path, struct ProbsegStream **out);

// Number of frames in the stream; 0 for NULL.
//
// # Safety
// `stream` must be NULL or a live handle from this library.
uint64_t probseg_stream_len(const struct ProbsegStream *stream);

// Release a stream handle; NULL is a no-op.
//
// # Safety
// `stream` must be NULL or a live handle, and must not be used afterward.
void probseg_stream_free(struct ProbsegStream *stream);

// Standard configuration for an algorithm at the given frame geometry:
// 28 s cap, 0.2 s minimum, the algorithm's usual threshold, and a 0.1 s
// smoothing window for the smoothed scan.
//
// # Safety
// `out` must be a valid pointer.
enum ProbsegStatus probseg_config_default(enum ProbsegAlgorithm algorithm,
                                          uint32_t sample_rate,
                                          uint32_t frame_stride,
                                          struct ProbsegConfig *out);

// Segment a stream under `config`. On `PROBSEG_STATUS_OK`, `*out` owns the
// resulting segment list; release it with [`probseg_segments_free`].
//
// # Safety
// `stream` must be a live handle; `config` and `out` must be valid
// pointers.
enum ProbsegStatus probseg_segment(const struct ProbsegStream *stream,
                                   const struct ProbsegConfig *config,
                                   struct ProbsegSegments **out);

// Number of segments in the list; 0 for NULL.
//
// # Safety
// `segments` must be NULL or a live handle from this library.
uint64_t probseg_segments_count(const struct ProbsegSegments *segments);

// Fetch segment `index` as a half-open frame interval `[start, end)`.
//
// # Safety
// `segments` must be a live handle; `start` and `end` must be valid
// pointers.
enum ProbsegStatus probseg_segments_get(const struct ProbsegSegments *segments,
                                        uint64_t index,
                                        uint64_t *start,
                                        uint64_t *end);

// Write the list to a `.segs` file (tab-separated start/end frames with
// header metadata), exactly as the CLI would.
//
// # Safety
// `segments` must be a live handle; `path` must be NUL-terminated.
enum ProbsegStatus probseg_segments_write_file(const struct ProbsegSegments *segments,
                                               const char *path);

// Release a segment list handle; NULL is a no-op.
//
// # Safety
// `segments` must be NULL or a live handle, and must not be used
// afterward.
void probseg_segments_free(struct ProbsegSegments *segments);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PROBSEG_H */
