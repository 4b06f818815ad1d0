//! Frame/time geometry, the probability-stream data model, and the file
//! formats shared by every other module.
//!
//! One frame covers `frame_stride` audio samples, so the default
//! 16 kHz / 320-sample layout runs at 50 frames per second. Modules exchange
//! frame indices, never seconds; seconds appear only at the edges
//! (configuration flags and manifests), converted through
//! [`seconds_to_frames`] with round-half-up so repeated conversions cannot
//! drift.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io_util::write_atomic;

/// Sampling geometry of a recording and of the fixed-length windows a frame
/// classifier is fed at inference time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AudioSpec {
    /// Samples per second of the underlying audio.
    pub sample_rate: u32,
    /// Samples per probability frame.
    pub frame_stride: u32,
    /// Length of one inference window in seconds.
    pub window_seconds: f64,
}

impl Default for AudioSpec {
    fn default() -> Self {
        AudioSpec {
            sample_rate: 16_000,
            frame_stride: 320,
            window_seconds: 20.0,
        }
    }
}

impl AudioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 || self.frame_stride == 0 {
            return Err(Error::InvalidArgument(
                "sample_rate and frame_stride must be positive".into(),
            ));
        }
        if !(self.window_seconds > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "window_seconds must be positive, got {}",
                self.window_seconds
            )));
        }
        Ok(())
    }

    /// Frames per second; 50 for the default spec. Not necessarily integer
    /// for non-default geometries.
    pub fn frames_per_second(&self) -> f64 {
        f64::from(self.sample_rate) / f64::from(self.frame_stride)
    }

    pub fn frames_to_seconds(&self, frames: usize) -> f64 {
        frames as f64 / self.frames_per_second()
    }

    /// Frames in one inference window.
    pub fn window_frames(&self) -> usize {
        seconds_to_frames(self.window_seconds, self).expect("window_seconds is positive")
    }
}

/// Convert a non-negative duration to a frame count, rounding half up.
pub fn seconds_to_frames(t: f64, spec: &AudioSpec) -> Result<usize> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "duration must be non-negative, got {t}"
        )));
    }
    Ok((t * spec.frames_per_second()).round() as usize)
}

/// Half-open frame interval `[start, end)` within one recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    /// `start` must be strictly below `end`; segments are never empty.
    pub fn new(start: usize, end: usize) -> Segment {
        assert!(start < end, "segment [{start}, {end}) is empty or reversed");
        Segment { start, end }
    }

    pub fn frames(&self) -> usize {
        self.end - self.start
    }

    pub fn duration_seconds(&self, spec: &AudioSpec) -> f64 {
        spec.frames_to_seconds(self.frames())
    }
}

/// Sorted, non-overlapping segments over one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentList {
    segments: Vec<Segment>,
    spec: AudioSpec,
    recording_id: String,
}

impl SegmentList {
    /// Validates ordering: each segment must end at or before the next one
    /// starts.
    pub fn new(
        segments: Vec<Segment>,
        spec: AudioSpec,
        recording_id: impl Into<String>,
    ) -> Result<Self> {
        spec.validate()?;
        for pair in segments.windows(2) {
            if pair[0].end > pair[1].start {
                return Err(Error::InvalidArgument(format!(
                    "segments [{}, {}) and [{}, {}) overlap or are out of order",
                    pair[0].start, pair[0].end, pair[1].start, pair[1].end
                )));
            }
        }
        Ok(SegmentList {
            segments,
            spec,
            recording_id: recording_id.into(),
        })
    }

    pub fn empty(spec: AudioSpec, recording_id: impl Into<String>) -> Self {
        SegmentList {
            segments: Vec::new(),
            spec,
            recording_id: recording_id.into(),
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn spec(&self) -> &AudioSpec {
        &self.spec
    }

    pub fn recording_id(&self) -> &str {
        &self.recording_id
    }

    pub fn count(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total frames covered by all segments.
    pub fn covered_frames(&self) -> usize {
        self.segments.iter().map(Segment::frames).sum()
    }

    /// End of the last segment, or 0 for an empty list.
    pub fn last_end(&self) -> usize {
        self.segments.last().map_or(0, |s| s.end)
    }
}

/// Per-frame probabilities of being inside a segment, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbStream {
    probs: Vec<f32>,
    spec: AudioSpec,
    recording_id: String,
}

impl ProbStream {
    pub fn new(probs: Vec<f32>, spec: AudioSpec, recording_id: impl Into<String>) -> Result<Self> {
        spec.validate()?;
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "probability {p} out of [0, 1] at index {i}"
                )));
            }
        }
        Ok(ProbStream {
            probs,
            spec,
            recording_id: recording_id.into(),
        })
    }

    /// For internal producers whose values are in range by construction.
    pub(crate) fn from_validated(
        probs: Vec<f32>,
        spec: AudioSpec,
        recording_id: impl Into<String>,
    ) -> Self {
        debug_assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
        ProbStream {
            probs,
            spec,
            recording_id: recording_id.into(),
        }
    }

    pub fn probs(&self) -> &[f32] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn spec(&self) -> &AudioSpec {
        &self.spec
    }

    pub fn recording_id(&self) -> &str {
        &self.recording_id
    }
}

/// Per-frame gold labels: `true` for frames inside a reference segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLabels {
    labels: Vec<bool>,
    spec: AudioSpec,
}

impl ReferenceLabels {
    pub fn new(labels: Vec<bool>, spec: AudioSpec) -> Result<Self> {
        spec.validate()?;
        Ok(ReferenceLabels { labels, spec })
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn spec(&self) -> &AudioSpec {
        &self.spec
    }
}

/// Paint segment coverage onto a frame grid of `total_frames`.
pub fn segments_to_labels(segs: &SegmentList, total_frames: usize) -> Result<ReferenceLabels> {
    let mut labels = vec![false; total_frames];
    for seg in segs.segments() {
        if seg.end > total_frames {
            return Err(Error::OutOfRange(format!(
                "segment [{}, {}) exceeds total frame count {total_frames}",
                seg.start, seg.end
            )));
        }
        for l in &mut labels[seg.start..seg.end] {
            *l = true;
        }
    }
    ReferenceLabels::new(labels, *segs.spec())
}

/// Maximal runs of `true` as a segment list; the inverse of
/// [`segments_to_labels`] whenever segments are separated by at least one
/// zero frame.
pub fn labels_to_segments(
    labels: &ReferenceLabels,
    recording_id: impl Into<String>,
) -> SegmentList {
    let mut segments = Vec::new();
    let mut run_start = None;
    for (i, &l) in labels.labels().iter().enumerate() {
        match (l, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                segments.push(Segment::new(s, i));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        segments.push(Segment::new(s, labels.len()));
    }
    SegmentList::new(segments, *labels.spec(), recording_id)
        .expect("runs are sorted and disjoint by construction")
}

/// Stitch per-window probability streams back into one recording-length
/// stream. All windows must share a spec and every window except the last
/// must span exactly one inference window; a short trailing window is
/// accepted.
pub fn concat_windows(windows: &[ProbStream]) -> Result<ProbStream> {
    let first = windows
        .first()
        .ok_or_else(|| Error::InvalidArgument("no windows to concatenate".into()))?;
    let spec = *first.spec();
    let window_frames = spec.window_frames();
    let mut probs = Vec::with_capacity(windows.iter().map(ProbStream::len).sum());
    for (i, w) in windows.iter().enumerate() {
        if *w.spec() != spec {
            return Err(Error::SpecMismatch(format!(
                "window {i} has spec {:?}, expected {:?}",
                w.spec(),
                spec
            )));
        }
        if i + 1 < windows.len() && w.len() != window_frames {
            return Err(Error::InvalidArgument(format!(
                "interior window {i} has {} frames, expected {window_frames}",
                w.len()
            )));
        }
        probs.extend_from_slice(w.probs());
    }
    Ok(ProbStream::from_validated(
        probs,
        spec,
        first.recording_id(),
    ))
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------
//
// Probabilities: raw little-endian f32 payload plus a `<path>.meta` text
// sidecar carrying the spec and recording id. Files ending in `.txt` use a
// one-value-per-line text form instead, with the same metadata in `# key=value`
// comment lines; handy for hand-written fixtures.
//
// Labels (`.labels`) and segment lists (`.segs`) are line-oriented text with
// the same comment-header convention.

const PROBS_FORMAT: &str = "probseg-probs-v1";
const LABELS_FORMAT: &str = "probseg-labels-v1";
const SEGS_FORMAT: &str = "probseg-segs-v1";

#[derive(Debug, Default)]
struct Header {
    format: Option<String>,
    recording_id: Option<String>,
    sample_rate: Option<u32>,
    frame_stride: Option<u32>,
    window_seconds: Option<f64>,
    frames: Option<usize>,
}

impl Header {
    fn apply(&mut self, key: &str, value: &str, path: &Path, line_no: usize) -> Result<()> {
        let parse_err = |what: &str| {
            Error::format(
                path,
                format!("line {line_no}: cannot parse {what} from {value:?}"),
            )
        };
        match key {
            "format" => self.format = Some(value.to_string()),
            "recording_id" => self.recording_id = Some(value.to_string()),
            "sample_rate" => {
                self.sample_rate = Some(value.parse().map_err(|_| parse_err("sample_rate"))?)
            }
            "frame_stride" => {
                self.frame_stride = Some(value.parse().map_err(|_| parse_err("frame_stride"))?)
            }
            "window_seconds" => {
                self.window_seconds = Some(value.parse().map_err(|_| parse_err("window_seconds"))?)
            }
            "frames" => self.frames = Some(value.parse().map_err(|_| parse_err("frames"))?),
            _ => {}
        }
        Ok(())
    }

    fn spec(&self) -> AudioSpec {
        let default = AudioSpec::default();
        AudioSpec {
            sample_rate: self.sample_rate.unwrap_or(default.sample_rate),
            frame_stride: self.frame_stride.unwrap_or(default.frame_stride),
            window_seconds: self.window_seconds.unwrap_or(default.window_seconds),
        }
    }

    fn check_format(&self, expected: &str, path: &Path) -> Result<()> {
        match &self.format {
            Some(f) if f != expected => Err(Error::format(
                path,
                format!("unexpected format {f:?}, expected {expected:?}"),
            )),
            _ => Ok(()),
        }
    }
}

fn spec_header_lines(out: &mut String, spec: &AudioSpec) {
    let _ = writeln!(out, "# sample_rate={}", spec.sample_rate);
    let _ = writeln!(out, "# frame_stride={}", spec.frame_stride);
    let _ = writeln!(out, "# window_seconds={}", spec.window_seconds);
}

/// Split a `# key=value` comment line; other comments are ignored.
fn comment_kv(line: &str) -> Option<(&str, &str)> {
    let body = line.strip_prefix('#')?.trim_start();
    let (key, value) = body.split_once('=')?;
    Some((key.trim(), value.trim()))
}

fn default_recording_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "recording".to_string())
}

fn is_text_probs(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "txt")
}

/// Write a probability stream. `.txt` paths get the text form; anything else
/// gets the binary payload plus a `.meta` sidecar.
pub fn write_probs(stream: &ProbStream, path: &Path) -> Result<()> {
    if is_text_probs(path) {
        let mut out = String::new();
        let _ = writeln!(out, "# format={PROBS_FORMAT}");
        let _ = writeln!(out, "# recording_id={}", stream.recording_id());
        spec_header_lines(&mut out, stream.spec());
        for p in stream.probs() {
            let _ = writeln!(out, "{p}");
        }
        write_atomic(path, out.as_bytes())
    } else {
        let mut payload = Vec::with_capacity(stream.len() * 4);
        for p in stream.probs() {
            payload.extend_from_slice(&p.to_le_bytes());
        }
        write_atomic(path, &payload)?;

        let mut meta = String::new();
        let _ = writeln!(meta, "format={PROBS_FORMAT}");
        let _ = writeln!(meta, "recording_id={}", stream.recording_id());
        let _ = writeln!(meta, "sample_rate={}", stream.spec().sample_rate);
        let _ = writeln!(meta, "frame_stride={}", stream.spec().frame_stride);
        let _ = writeln!(meta, "window_seconds={}", stream.spec().window_seconds);
        let _ = writeln!(meta, "frames={}", stream.len());
        write_atomic(&meta_path(path), meta.as_bytes())
    }
}

fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta");
    std::path::PathBuf::from(s)
}

pub fn read_probs(path: &Path) -> Result<ProbStream> {
    if is_text_probs(path) {
        read_probs_text(path)
    } else {
        read_probs_binary(path)
    }
}

fn validated_prob(value: f32, index: usize, path: &Path) -> Result<f32> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::format(
            path,
            format!("probability {value} out of [0, 1] at index {index}"),
        ));
    }
    Ok(value)
}

fn read_probs_text(path: &Path) -> Result<ProbStream> {
    let content = fs::read_to_string(path)?;
    let mut header = Header::default();
    let mut probs = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some((k, v)) = comment_kv(trimmed) {
                header.apply(k, v, path, line_no)?;
            }
            continue;
        }
        let value: f32 = trimmed.parse().map_err(|_| {
            Error::format(path, format!("line {line_no}: cannot parse probability"))
        })?;
        if value.is_nan() {
            return Err(Error::format(
                path,
                format!("NaN probability at index {}", probs.len()),
            ));
        }
        probs.push(validated_prob(value, probs.len(), path)?);
    }
    header.check_format(PROBS_FORMAT, path)?;
    let id = header
        .recording_id
        .clone()
        .unwrap_or_else(|| default_recording_id(path));
    ProbStream::new(probs, header.spec(), id)
}

fn read_probs_binary(path: &Path) -> Result<ProbStream> {
    let meta_file = meta_path(path);
    let meta = fs::read_to_string(&meta_file).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::format(path, format!("missing sidecar {}", meta_file.display()))
        } else {
            Error::Io(e)
        }
    })?;
    let mut header = Header::default();
    for (line_no, line) in meta.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::format(&meta_file, format!("line {line_no}: expected key=value"))
        })?;
        header.apply(k.trim(), v.trim(), &meta_file, line_no)?;
    }
    header.check_format(PROBS_FORMAT, &meta_file)?;

    let payload = fs::read(path)?;
    if payload.len() % 4 != 0 {
        return Err(Error::format(
            path,
            format!("payload of {} bytes is not a whole number of f32", payload.len()),
        ));
    }
    let count = payload.len() / 4;
    if let Some(expected) = header.frames {
        if expected != count {
            return Err(Error::format(
                path,
                format!("sidecar declares {expected} frames but payload holds {count}"),
            ));
        }
    }
    let mut probs = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let value = f32::from_le_bytes(chunk.try_into().expect("chunk of 4"));
        if value.is_nan() {
            return Err(Error::format(path, format!("NaN probability at index {i}")));
        }
        probs.push(validated_prob(value, i, path)?);
    }
    let id = header
        .recording_id
        .clone()
        .unwrap_or_else(|| default_recording_id(path));
    ProbStream::new(probs, header.spec(), id)
}

pub fn write_labels(labels: &ReferenceLabels, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# format={LABELS_FORMAT}");
    spec_header_lines(&mut out, labels.spec());
    for &l in labels.labels() {
        let _ = writeln!(out, "{}", u8::from(l));
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_labels(path: &Path) -> Result<ReferenceLabels> {
    let content = fs::read_to_string(path)?;
    let mut header = Header::default();
    let mut labels = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some((k, v)) = comment_kv(trimmed) {
                header.apply(k, v, path, line_no)?;
            }
            continue;
        }
        match trimmed {
            "0" => labels.push(false),
            "1" => labels.push(true),
            other => {
                return Err(Error::format(
                    path,
                    format!("line {line_no}: label must be 0 or 1, got {other:?}"),
                ))
            }
        }
    }
    header.check_format(LABELS_FORMAT, path)?;
    ReferenceLabels::new(labels, header.spec())
}

pub fn write_segments(segs: &SegmentList, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# format={SEGS_FORMAT}");
    let _ = writeln!(out, "# recording_id={}", segs.recording_id());
    spec_header_lines(&mut out, segs.spec());
    for seg in segs.segments() {
        let _ = writeln!(out, "{}\t{}", seg.start, seg.end);
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_segments(path: &Path) -> Result<SegmentList> {
    let content = fs::read_to_string(path)?;
    let mut header = Header::default();
    let mut segments = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some((k, v)) = comment_kv(trimmed) {
                header.apply(k, v, path, line_no)?;
            }
            continue;
        }
        let mut parts = trimmed.split('\t');
        let parse = |part: Option<&str>| -> Result<usize> {
            part.and_then(|p| p.trim().parse().ok()).ok_or_else(|| {
                Error::format(
                    path,
                    format!("line {line_no}: expected start<TAB>end frame indices"),
                )
            })
        };
        let start = parse(parts.next())?;
        let end = parse(parts.next())?;
        if start >= end {
            return Err(Error::format(
                path,
                format!("line {line_no}: segment [{start}, {end}) is empty or reversed"),
            ));
        }
        segments.push(Segment::new(start, end));
    }
    header.check_format(SEGS_FORMAT, path)?;
    let id = header
        .recording_id
        .clone()
        .unwrap_or_else(|| default_recording_id(path));
    SegmentList::new(segments, header.spec(), id)
        .map_err(|e| Error::format(path, e.to_string()))
}
