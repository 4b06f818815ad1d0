//! C ABI over the segmentation core.
//!
//! The surface is deliberately small: build a probability stream (from a
//! buffer or a `.probs` file), run a segmenter over it, and read the
//! resulting frame intervals back. Everything heap-allocated crosses the
//! boundary as an opaque handle with an explicit `_free` function; every
//! fallible call returns a [`ProbsegStatus`], with a human-readable message
//! for the most recent failure available per thread via
//! [`probseg_last_error_message`].
//!
//! Rules for callers:
//! - Handles are not thread-safe; share them across threads only with
//!   external synchronization.
//! - Every `*_new`/`probseg_segment` out-pointer is written only on
//!   `PROBSEG_STATUS_OK`.
//! - Strings returned by this library are NUL-terminated, UTF-8, and owned
//!   by the library; do not free them.
//!
//! The matching C header is generated into `include/probseg.h` at build
//! time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use probseg::{
    read_probs, segment, write_segments, Algorithm, AudioSpec, Error, ProbStream, SegmentList,
    SegmenterConfig,
};

/// Outcome of a fallible call. `Ok` is zero; everything else names the
/// failure class, and [`probseg_last_error_message`] carries the detail.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbsegStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A value or configuration violated its documented constraints.
    InvalidArgument = 2,
    /// An index or frame range lay outside the addressed object.
    OutOfRange = 3,
    /// A file's contents did not match its declared format.
    FormatError = 4,
    /// Audio encoding this library does not process.
    UnsupportedAudio = 5,
    /// Two objects with incompatible sampling geometry were combined.
    SpecMismatch = 6,
    /// Noise calibration could not reach its targets.
    CalibrationFailed = 7,
    /// Operating-system level I/O failure.
    IoError = 8,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 9,
    /// An internal invariant failed; the library state is still sound.
    Panic = 10,
}

/// Segmentation algorithm selector for [`ProbsegConfig`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbsegAlgorithm {
    /// Offline divide-and-conquer splitting at lowest-probability frames.
    Pdac = 0,
    /// Streaming length-triggered splitting at the longest pause.
    Pstrm = 1,
    /// Online threshold scan with a position-dependent closing filter.
    Pthr = 2,
    /// Threshold scan over a moving-average-smoothed stream.
    PthrMa = 3,
}

impl From<ProbsegAlgorithm> for Algorithm {
    fn from(a: ProbsegAlgorithm) -> Algorithm {
        match a {
            ProbsegAlgorithm::Pdac => Algorithm::Pdac,
            ProbsegAlgorithm::Pstrm => Algorithm::Pstrm,
            ProbsegAlgorithm::Pthr => Algorithm::Pthr,
            ProbsegAlgorithm::PthrMa => Algorithm::PthrMa,
        }
    }
}

/// Segmenter tuning in frame units. Obtain a baseline from
/// [`probseg_config_default`] and adjust fields before calling
/// [`probseg_segment`]; the call re-validates everything.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbsegConfig {
    pub algorithm: ProbsegAlgorithm,
    /// Hard cap on emitted segment length, frames. Must be at least 1.
    pub max_frames: u64,
    /// Minimum useful segment length, frames.
    pub min_frames: u64,
    /// Frame offset where the closing filter finishes ramping up to
    /// `threshold`. Must satisfy min ≤ lerp_min ≤ lerp_max ≤ max.
    pub lerp_min_frames: u64,
    /// Frame offset where the closing filter starts ramping toward 1.
    pub lerp_max_frames: u64,
    /// Opening / splitting threshold, strictly between 0 and 1.
    pub threshold: f64,
    /// Moving-average window, frames; read only by the smoothed scan.
    pub smoothing_frames: u64,
}

/// Opaque probability stream handle.
pub struct ProbsegStream(ProbStream);

/// Opaque segment list handle.
pub struct ProbsegSegments(SegmentList);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(e: &Error) -> ProbsegStatus {
    set_error(&e.to_string());
    match e {
        Error::InvalidArgument(_) => ProbsegStatus::InvalidArgument,
        Error::OutOfRange(_) => ProbsegStatus::OutOfRange,
        Error::Format { .. } => ProbsegStatus::FormatError,
        Error::UnsupportedAudio(_) => ProbsegStatus::UnsupportedAudio,
        Error::SpecMismatch(_) => ProbsegStatus::SpecMismatch,
        Error::Calibration { .. } => ProbsegStatus::CalibrationFailed,
        Error::Io(_) => ProbsegStatus::IoError,
    }
}

fn null_argument(what: &str) -> ProbsegStatus {
    set_error(&format!("{what} must not be NULL"));
    ProbsegStatus::NullArgument
}

/// Run a body behind the ABI boundary: a Rust panic must never unwind into
/// C, so it is downgraded to a status code here.
fn guarded(body: impl FnOnce() -> ProbsegStatus) -> ProbsegStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic; see stderr for details");
            ProbsegStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be NULL or a NUL-terminated string.
unsafe fn required_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, ProbsegStatus> {
    if s.is_null() {
        return Err(null_argument(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        ProbsegStatus::InvalidUtf8
    })
}

/// Library version as a static NUL-terminated string; never NULL, never
/// freed by the caller.
#[no_mangle]
pub extern "C" fn probseg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for this thread's most recent failure, as a NUL-terminated
/// string owned by the library. Empty (not NULL) before the first failure;
/// overwritten by the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn probseg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Build a probability stream from `len` per-frame probabilities in
/// `[0, 1]`. `recording_id` may be NULL for an anonymous stream. On
/// `PROBSEG_STATUS_OK`, `*out` owns the stream; release it with
/// [`probseg_stream_free`].
///
/// # Safety
/// `probs` must point to `len` readable floats (it may be NULL only when
/// `len` is 0); `recording_id` must be NULL or NUL-terminated; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn probseg_stream_new(
    probs: *const f32,
    len: usize,
    sample_rate: u32,
    frame_stride: u32,
    recording_id: *const c_char,
    out: *mut *mut ProbsegStream,
) -> ProbsegStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        if probs.is_null() && len > 0 {
            return null_argument("probs");
        }
        let id = if recording_id.is_null() {
            "stream"
        } else {
            match required_str(recording_id, "recording_id") {
                Ok(id) => id,
                Err(status) => return status,
            }
        };
        let values = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(probs, len).to_vec()
        };
        let spec = AudioSpec {
            sample_rate,
            frame_stride,
            ..AudioSpec::default()
        };
        match ProbStream::new(values, spec, id) {
            Ok(stream) => {
                *out = Box::into_raw(Box::new(ProbsegStream(stream)));
                ProbsegStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Load a probability stream from a `.probs` (binary, with sidecar
/// metadata) or `.txt` file, exactly as the CLI would.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn probseg_stream_from_file(
    path: *const c_char,
    out: *mut *mut ProbsegStream,
) -> ProbsegStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let path = match required_str(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match read_probs(Path::new(path)) {
            Ok(stream) => {
                *out = Box::into_raw(Box::new(ProbsegStream(stream)));
                ProbsegStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of frames in the stream; 0 for NULL.
///
/// # Safety
/// `stream` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn probseg_stream_len(stream: *const ProbsegStream) -> u64 {
    if stream.is_null() {
        return 0;
    }
    (*stream).0.len() as u64
}

/// Release a stream handle; NULL is a no-op.
///
/// # Safety
/// `stream` must be NULL or a live handle, and must not be used afterward.
#[no_mangle]
pub unsafe extern "C" fn probseg_stream_free(stream: *mut ProbsegStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Standard configuration for an algorithm at the given frame geometry:
/// 28 s cap, 0.2 s minimum, the algorithm's usual threshold, and a 0.1 s
/// smoothing window for the smoothed scan.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn probseg_config_default(
    algorithm: ProbsegAlgorithm,
    sample_rate: u32,
    frame_stride: u32,
    out: *mut ProbsegConfig,
) -> ProbsegStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let spec = AudioSpec {
            sample_rate,
            frame_stride,
            ..AudioSpec::default()
        };
        match SegmenterConfig::defaults_for(Algorithm::from(algorithm), &spec) {
            Ok(cfg) => {
                *out = ProbsegConfig {
                    algorithm,
                    max_frames: cfg.max as u64,
                    min_frames: cfg.min as u64,
                    lerp_min_frames: cfg.lerp_min as u64,
                    lerp_max_frames: cfg.lerp_max as u64,
                    threshold: cfg.thr,
                    smoothing_frames: cfg.n_ma as u64,
                };
                ProbsegStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

fn frames(value: u64, what: &str) -> Result<usize, ProbsegStatus> {
    usize::try_from(value).map_err(|_| {
        set_error(&format!("{what} = {value} does not fit this platform"));
        ProbsegStatus::InvalidArgument
    })
}

/// Segment a stream under `config`. On `PROBSEG_STATUS_OK`, `*out` owns the
/// resulting segment list; release it with [`probseg_segments_free`].
///
/// # Safety
/// `stream` must be a live handle; `config` and `out` must be valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn probseg_segment(
    stream: *const ProbsegStream,
    config: *const ProbsegConfig,
    out: *mut *mut ProbsegSegments,
) -> ProbsegStatus {
    guarded(|| {
        if stream.is_null() {
            return null_argument("stream");
        }
        if config.is_null() {
            return null_argument("config");
        }
        if out.is_null() {
            return null_argument("out");
        }
        let c = &*config;
        let cfg = SegmenterConfig {
            algorithm: Algorithm::from(c.algorithm),
            max: match frames(c.max_frames, "max_frames") {
                Ok(v) => v,
                Err(status) => return status,
            },
            min: match frames(c.min_frames, "min_frames") {
                Ok(v) => v,
                Err(status) => return status,
            },
            thr: c.threshold,
            n_ma: match frames(c.smoothing_frames, "smoothing_frames") {
                Ok(v) => v,
                Err(status) => return status,
            },
            lerp_min: match frames(c.lerp_min_frames, "lerp_min_frames") {
                Ok(v) => v,
                Err(status) => return status,
            },
            lerp_max: match frames(c.lerp_max_frames, "lerp_max_frames") {
                Ok(v) => v,
                Err(status) => return status,
            },
        };
        match segment(&(*stream).0, &cfg) {
            Ok(segs) => {
                *out = Box::into_raw(Box::new(ProbsegSegments(segs)));
                ProbsegStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of segments in the list; 0 for NULL.
///
/// # Safety
/// `segments` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn probseg_segments_count(segments: *const ProbsegSegments) -> u64 {
    if segments.is_null() {
        return 0;
    }
    (*segments).0.count() as u64
}

/// Fetch segment `index` as a half-open frame interval `[start, end)`.
///
/// # Safety
/// `segments` must be a live handle; `start` and `end` must be valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn probseg_segments_get(
    segments: *const ProbsegSegments,
    index: u64,
    start: *mut u64,
    end: *mut u64,
) -> ProbsegStatus {
    guarded(|| {
        if segments.is_null() {
            return null_argument("segments");
        }
        if start.is_null() || end.is_null() {
            return null_argument("start/end");
        }
        let list = &(*segments).0;
        let Some(sgm) = usize::try_from(index)
            .ok()
            .and_then(|i| list.segments().get(i))
        else {
            set_error(&format!(
                "segment index {index} out of range for a list of {}",
                list.count()
            ));
            return ProbsegStatus::OutOfRange;
        };
        *start = sgm.start as u64;
        *end = sgm.end as u64;
        ProbsegStatus::Ok
    })
}

/// Write the list to a `.segs` file (tab-separated start/end frames with
/// header metadata), exactly as the CLI would.
///
/// # Safety
/// `segments` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn probseg_segments_write_file(
    segments: *const ProbsegSegments,
    path: *const c_char,
) -> ProbsegStatus {
    guarded(|| {
        if segments.is_null() {
            return null_argument("segments");
        }
        let path = match required_str(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match write_segments(&(*segments).0, Path::new(path)) {
            Ok(()) => ProbsegStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Release a segment list handle; NULL is a no-op.
///
/// # Safety
/// `segments` must be NULL or a live handle, and must not be used
/// afterward.
#[no_mangle]
pub unsafe extern "C" fn probseg_segments_free(segments: *mut ProbsegSegments) {
    if !segments.is_null() {
        drop(Box::from_raw(segments));
    }
}
