//! Exercises the C ABI the way a foreign caller would: through the
//! `extern "C"` functions and raw pointers only, checking status codes,
//! error messages, and the generated header.

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use probseg_ffi::{
    probseg_config_default, probseg_last_error_message, probseg_segment, probseg_segments_count,
    probseg_segments_free, probseg_segments_get, probseg_segments_write_file, probseg_stream_free,
    probseg_stream_from_file, probseg_stream_len, probseg_stream_new, probseg_version,
    ProbsegAlgorithm, ProbsegConfig, ProbsegSegments, ProbsegStream, ProbsegStatus,
};

fn last_error() -> String {
    let ptr = probseg_last_error_message();
    assert!(!ptr.is_null(), "error message pointer is never NULL");
    unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned()
}

fn c_path(path: &Path) -> CString {
    CString::new(path.to_str().unwrap()).unwrap()
}

/// Blocky stream: speech on [3, 10) and [14, 20), silence elsewhere.
fn blocky_probs() -> Vec<f32> {
    let mut probs = vec![0.02_f32; 24];
    probs[3..10].fill(0.97);
    probs[14..20].fill(0.95);
    probs
}

unsafe fn make_stream(probs: &[f32]) -> *mut ProbsegStream {
    let mut stream: *mut ProbsegStream = ptr::null_mut();
    let status = probseg_stream_new(
        probs.as_ptr(),
        probs.len(),
        16_000,
        320,
        ptr::null(),
        &mut stream,
    );
    assert_eq!(status, ProbsegStatus::Ok, "{}", last_error());
    assert!(!stream.is_null());
    stream
}

unsafe fn default_config(algorithm: ProbsegAlgorithm) -> ProbsegConfig {
    let mut cfg = std::mem::MaybeUninit::<ProbsegConfig>::uninit();
    let status = probseg_config_default(algorithm, 16_000, 320, cfg.as_mut_ptr());
    assert_eq!(status, ProbsegStatus::Ok, "{}", last_error());
    cfg.assume_init()
}

#[test]
fn version_is_a_static_dotted_string() {
    let ptr = probseg_version();
    assert!(!ptr.is_null());
    let version = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
    assert!(
        version.contains('.'),
        "version {version:?} should look like semver"
    );
    // Static storage: repeated calls hand back the same pointer.
    assert_eq!(ptr, probseg_version());
}

#[test]
fn segment_round_trip_through_the_abi() {
    unsafe {
        let probs = blocky_probs();
        let stream = make_stream(&probs);
        assert_eq!(probseg_stream_len(stream), probs.len() as u64);

        let defaults = default_config(ProbsegAlgorithm::Pthr);
        assert_eq!(defaults.algorithm, ProbsegAlgorithm::Pthr);
        assert!(defaults.max_frames >= 1);
        assert!(defaults.threshold > 0.0 && defaults.threshold < 1.0);

        // The stock numbers target long-form audio; rescale to this tiny
        // stream so the four-frame pause actually closes a segment.
        let cfg = ProbsegConfig {
            max_frames: 16,
            min_frames: 2,
            lerp_min_frames: 2,
            lerp_max_frames: 12,
            threshold: 0.5,
            ..defaults
        };

        let mut segs: *mut ProbsegSegments = ptr::null_mut();
        let status = probseg_segment(stream, &cfg, &mut segs);
        assert_eq!(status, ProbsegStatus::Ok, "{}", last_error());

        let count = probseg_segments_count(segs);
        assert_eq!(count, 2, "two speech blocks in, two segments out");
        let mut spans = Vec::new();
        for i in 0..count {
            let (mut start, mut end) = (0_u64, 0_u64);
            let status = probseg_segments_get(segs, i, &mut start, &mut end);
            assert_eq!(status, ProbsegStatus::Ok, "{}", last_error());
            assert!(start < end);
            spans.push((start, end));
        }
        assert!(spans[0].1 <= spans[1].0, "segments are ordered and disjoint");
        assert!(spans[0].0 <= 3 && spans[0].1 >= 9, "first block covered");
        assert!(spans[1].0 <= 14 && spans[1].1 >= 19, "second block covered");

        // One past the end is a range error, not UB.
        let (mut start, mut end) = (0_u64, 0_u64);
        let status = probseg_segments_get(segs, count, &mut start, &mut end);
        assert_eq!(status, ProbsegStatus::OutOfRange);
        assert!(last_error().contains("out of range"), "{}", last_error());

        probseg_segments_free(segs);
        probseg_stream_free(stream);
    }
}

#[test]
fn written_file_parses_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("abi.segs");
    unsafe {
        let probs = blocky_probs();
        let stream = make_stream(&probs);
        let cfg = default_config(ProbsegAlgorithm::PthrMa);
        let mut segs: *mut ProbsegSegments = ptr::null_mut();
        assert_eq!(
            probseg_segment(stream, &cfg, &mut segs),
            ProbsegStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(
            probseg_segments_write_file(segs, c_path(&path).as_ptr()),
            ProbsegStatus::Ok,
            "{}",
            last_error()
        );

        let read_back = probseg::read_segments(&path).unwrap();
        assert_eq!(read_back.count() as u64, probseg_segments_count(segs));
        for (i, sgm) in read_back.segments().iter().enumerate() {
            let (mut start, mut end) = (0_u64, 0_u64);
            probseg_segments_get(segs, i as u64, &mut start, &mut end);
            assert_eq!((start, end), (sgm.start as u64, sgm.end as u64));
        }

        probseg_segments_free(segs);
        probseg_stream_free(stream);
    }
}

#[test]
fn stream_from_file_matches_in_memory_stream() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("abi.probs");
    let probs = blocky_probs();
    let spec = probseg::AudioSpec::default();
    let stream = probseg::ProbStream::new(probs.clone(), spec, "abi").unwrap();
    probseg::write_probs(&stream, &path).unwrap();

    unsafe {
        let mut handle: *mut ProbsegStream = ptr::null_mut();
        let status = probseg_stream_from_file(c_path(&path).as_ptr(), &mut handle);
        assert_eq!(status, ProbsegStatus::Ok, "{}", last_error());
        assert_eq!(probseg_stream_len(handle), probs.len() as u64);
        probseg_stream_free(handle);
    }
}

#[test]
fn missing_file_reports_io_error() {
    unsafe {
        let mut handle: *mut ProbsegStream = ptr::null_mut();
        let path = CString::new("/nonexistent/abi.txt").unwrap();
        let status = probseg_stream_from_file(path.as_ptr(), &mut handle);
        assert_eq!(status, ProbsegStatus::IoError);
        assert!(handle.is_null(), "out pointer untouched on failure");
        assert!(!last_error().is_empty());

        // A binary stream whose metadata sidecar is gone is a format
        // problem with that file, not a raw I/O failure.
        let path = CString::new("/nonexistent/abi.probs").unwrap();
        let status = probseg_stream_from_file(path.as_ptr(), &mut handle);
        assert_eq!(status, ProbsegStatus::FormatError);
        assert!(last_error().contains("sidecar"), "{}", last_error());
    }
}

#[test]
fn null_arguments_are_rejected_not_dereferenced() {
    unsafe {
        let mut stream: *mut ProbsegStream = ptr::null_mut();
        // probs NULL with nonzero len.
        let status = probseg_stream_new(ptr::null(), 4, 16_000, 320, ptr::null(), &mut stream);
        assert_eq!(status, ProbsegStatus::NullArgument);
        assert!(last_error().contains("probs"), "{}", last_error());

        // NULL out pointer.
        let probs = [0.5_f32];
        let status = probseg_stream_new(
            probs.as_ptr(),
            probs.len(),
            16_000,
            320,
            ptr::null(),
            ptr::null_mut(),
        );
        assert_eq!(status, ProbsegStatus::NullArgument);

        // NULL stream into segment.
        let cfg = default_config(ProbsegAlgorithm::Pthr);
        let mut segs: *mut ProbsegSegments = ptr::null_mut();
        let status = probseg_segment(ptr::null(), &cfg, &mut segs);
        assert_eq!(status, ProbsegStatus::NullArgument);
        assert!(last_error().contains("stream"), "{}", last_error());

        // Size queries treat NULL as empty rather than crashing.
        assert_eq!(probseg_stream_len(ptr::null()), 0);
        assert_eq!(probseg_segments_count(ptr::null()), 0);

        // Frees of NULL are no-ops.
        probseg_stream_free(ptr::null_mut());
        probseg_segments_free(ptr::null_mut());
    }
}

#[test]
fn zero_length_stream_needs_no_buffer() {
    unsafe {
        let mut stream: *mut ProbsegStream = ptr::null_mut();
        let status = probseg_stream_new(ptr::null(), 0, 16_000, 320, ptr::null(), &mut stream);
        assert_eq!(status, ProbsegStatus::Ok, "{}", last_error());
        assert_eq!(probseg_stream_len(stream), 0);

        let cfg = default_config(ProbsegAlgorithm::Pdac);
        let mut segs: *mut ProbsegSegments = ptr::null_mut();
        assert_eq!(
            probseg_segment(stream, &cfg, &mut segs),
            ProbsegStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(probseg_segments_count(segs), 0);

        probseg_segments_free(segs);
        probseg_stream_free(stream);
    }
}

#[test]
fn invalid_config_returns_status_and_message() {
    unsafe {
        let probs = blocky_probs();
        let stream = make_stream(&probs);
        let cfg = ProbsegConfig {
            threshold: 0.0, // must be strictly inside (0, 1)
            ..default_config(ProbsegAlgorithm::Pthr)
        };
        let mut segs: *mut ProbsegSegments = ptr::null_mut();
        let status = probseg_segment(stream, &cfg, &mut segs);
        assert_eq!(status, ProbsegStatus::InvalidArgument);
        assert!(segs.is_null());
        assert!(last_error().contains("thr"), "{}", last_error());
        probseg_stream_free(stream);
    }
}

#[test]
fn out_of_range_probability_is_invalid() {
    unsafe {
        let probs = [0.5_f32, 1.5];
        let mut stream: *mut ProbsegStream = ptr::null_mut();
        let status = probseg_stream_new(
            probs.as_ptr(),
            probs.len(),
            16_000,
            320,
            ptr::null(),
            &mut stream,
        );
        assert_eq!(status, ProbsegStatus::InvalidArgument);
        assert!(stream.is_null());
    }
}

#[test]
fn non_utf8_recording_id_is_rejected() {
    unsafe {
        let probs = [0.5_f32];
        let bad_id = [0xFF_u8, 0xFE, 0x00];
        let mut stream: *mut ProbsegStream = ptr::null_mut();
        let status = probseg_stream_new(
            probs.as_ptr(),
            probs.len(),
            16_000,
            320,
            bad_id.as_ptr() as *const c_char,
            &mut stream,
        );
        assert_eq!(status, ProbsegStatus::InvalidUtf8);
        assert!(last_error().contains("recording_id"), "{}", last_error());
    }
}

#[test]
fn generated_header_declares_the_surface() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("probseg.h");
    let text = std::fs::read_to_string(&header)
        .unwrap_or_else(|e| panic!("missing generated header {}: {e}", header.display()));
    for needle in [
        "PROBSEG_H",
        "typedef struct ProbsegStream ProbsegStream;",
        "typedef struct ProbsegSegments ProbsegSegments;",
        "probseg_version(void)",
        "probseg_last_error_message(void)",
        "probseg_stream_new",
        "probseg_stream_from_file",
        "probseg_stream_len",
        "probseg_stream_free",
        "probseg_config_default",
        "probseg_segment(",
        "probseg_segments_count",
        "probseg_segments_get",
        "probseg_segments_write_file",
        "probseg_segments_free",
        "PROBSEG_STATUS_OK",
        "PROBSEG_ALGORITHM_PTHR_MA",
    ] {
        assert!(
            text.contains(needle),
            "header should declare {needle:?}\n--- header ---\n{text}"
        );
    }
}
