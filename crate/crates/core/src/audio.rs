//! WAV reading and writing, slicing a recording into one file per segment,
//! and the tab-separated manifest that lists what was sliced.
//!
//! Only 16-bit PCM mono input is supported; anything else is rejected with
//! a clear error rather than converted, keeping codec concerns out of the
//! pipeline. Slicing is sample-exact: frame `i` starts at sample
//! `i · frame_stride`, so segment boundaries land precisely where the
//! probability stream says they are.

use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{AudioSpec, SegmentList};
use crate::io_util::write_atomic;

/// Header line of a manifest file.
pub const MANIFEST_HEADER: &str = "id\tpath\tstart\tduration";

/// One sliced segment: which recording it came from, where the slice lives
/// on disk, and where it sits on the source timeline (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub recording_id: String,
    pub path: String,
    /// Start within the source recording, seconds.
    pub start: f64,
    /// Slice length, seconds; always positive.
    pub duration: f64,
}

/// Rows describing a sliced corpus, one per segment. Rows of one recording
/// keep the temporal order of the source.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn new(rows: Vec<ManifestRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if !(row.duration > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "manifest row {i}: duration must be positive, got {}",
                    row.duration
                )));
            }
            if !(row.start >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "manifest row {i}: start must be non-negative, got {}",
                    row.start
                )));
            }
            for (name, field) in [("id", &row.recording_id), ("path", &row.path)] {
                if field.contains(['\t', '\n', '\r']) {
                    return Err(Error::InvalidArgument(format!(
                        "manifest row {i}: {name} must not contain tabs or line breaks"
                    )));
                }
            }
        }
        for (i, pair) in rows.windows(2).enumerate() {
            if pair[0].recording_id == pair[1].recording_id && pair[1].start < pair[0].start {
                return Err(Error::InvalidArgument(format!(
                    "manifest rows {i} and {} of recording {} run backwards in time",
                    i + 1,
                    pair[0].recording_id
                )));
            }
        }
        Ok(Manifest { rows })
    }

    pub fn rows(&self) -> &[ManifestRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn map_hound(path: &Path, e: hound::Error) -> Error {
    match e {
        // hound reports a short read as a custom io error with this fixed
        // message; surface it as what it means — a truncated file.
        hound::Error::IoError(io)
            if io.kind() == std::io::ErrorKind::UnexpectedEof
                || io.to_string().contains("read enough bytes") =>
        {
            Error::format(path, "file is truncated")
        }
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::format(path, other.to_string()),
    }
}

/// Spec for a recording at `sample_rate`, keeping the default geometry's
/// 20 ms frame hop. Rates that cannot express a whole-sample 20 ms hop are
/// rejected; resampling is a user-side concern.
fn spec_for_rate(sample_rate: u32) -> Result<AudioSpec> {
    let fps = AudioSpec::default().frames_per_second();
    let stride = f64::from(sample_rate) / fps;
    if sample_rate == 0 || stride.fract() != 0.0 {
        return Err(Error::UnsupportedAudio(format!(
            "sample rate {sample_rate} does not admit a whole-sample {} ms frame hop",
            1000.0 / fps
        )));
    }
    Ok(AudioSpec {
        sample_rate,
        frame_stride: stride as u32,
        ..AudioSpec::default()
    })
}

/// Read a 16-bit PCM mono WAV file. Returns the samples and the spec that
/// puts the recording on the standard frame grid (its own sample rate, the
/// default 20 ms hop). Other channel counts or encodings are errors.
pub fn read_wav(path: &Path) -> Result<(Vec<i16>, AudioSpec)> {
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let wav = reader.spec();
    if wav.channels != 1 {
        return Err(Error::UnsupportedAudio(format!(
            "{}: expected mono, got {} channels",
            path.display(),
            wav.channels
        )));
    }
    if wav.sample_format != hound::SampleFormat::Int || wav.bits_per_sample != 16 {
        return Err(Error::UnsupportedAudio(format!(
            "{}: expected 16-bit PCM, got {}-bit {:?}",
            path.display(),
            wav.bits_per_sample,
            wav.sample_format
        )));
    }
    let spec = spec_for_rate(wav.sample_rate)?;
    let samples = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| map_hound(path, e))?;
    Ok((samples, spec))
}

/// Write 16-bit PCM mono samples as a WAV file, atomically.
pub fn write_wav(path: &Path, samples: &[i16], sample_rate: u32) -> Result<()> {
    let wav = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    let mut writer = hound::WavWriter::new(&mut cursor, wav).map_err(|e| map_hound(path, e))?;
    {
        let mut samples_out = writer.get_i16_writer(samples.len() as u32);
        for &s in samples {
            samples_out.write_sample(s);
        }
        samples_out.flush().map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))?;
    write_atomic(path, cursor.get_ref())
}

/// Slice a recording into one WAV file per segment, named
/// `<recording_id>_<index>.wav` under `out_dir` (created if missing).
/// Returns a manifest row per slice. Distinct segments of one list get
/// distinct indices, so no two slices share a path.
pub fn slice_wav(
    samples: &[i16],
    spec: &AudioSpec,
    segs: &SegmentList,
    out_dir: &Path,
) -> Result<Manifest> {
    // Slicing only depends on the sample geometry; the inference-window
    // length may differ between the audio and the segment list.
    if spec.sample_rate != segs.spec().sample_rate
        || spec.frame_stride != segs.spec().frame_stride
    {
        return Err(Error::SpecMismatch(format!(
            "segment list for {} was built at {} Hz / stride {}, audio is {} Hz / stride {}",
            segs.recording_id(),
            segs.spec().sample_rate,
            segs.spec().frame_stride,
            spec.sample_rate,
            spec.frame_stride
        )));
    }
    fs::create_dir_all(out_dir)?;
    let stride = spec.frame_stride as usize;
    let mut rows = Vec::with_capacity(segs.count());
    for (index, seg) in segs.segments().iter().enumerate() {
        let s = seg.start * stride;
        let e = seg.end * stride;
        if e > samples.len() {
            return Err(Error::OutOfRange(format!(
                "segment {index} [{}, {}) needs samples up to {e} \
                 but the recording has {}",
                seg.start,
                seg.end,
                samples.len()
            )));
        }
        let file = out_dir.join(format!("{}_{index}.wav", segs.recording_id()));
        write_wav(&file, &samples[s..e], spec.sample_rate)?;
        rows.push(ManifestRow {
            recording_id: segs.recording_id().to_string(),
            path: file.to_string_lossy().into_owned(),
            start: spec.frames_to_seconds(seg.start),
            duration: seg.duration_seconds(spec),
        });
    }
    Manifest::new(rows)
}

/// Write a manifest as tab-separated text: a fixed header line, then one
/// row per segment with seconds at millisecond precision.
pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{MANIFEST_HEADER}");
    for row in manifest.rows() {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.3}\t{:.3}",
            row.recording_id, row.path, row.start, row.duration
        );
    }
    write_atomic(path, out.as_bytes())
}

/// Read a manifest written by [`write_manifest`]. Malformed rows are
/// reported with their line number.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == MANIFEST_HEADER => {}
        Some((_, first)) => {
            return Err(Error::format(
                path,
                format!("line 1: expected header `{MANIFEST_HEADER}`, got `{first}`"),
            ))
        }
        None => return Err(Error::format(path, "empty file, expected a manifest header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::format(
                path,
                format!(
                    "line {line_no}: expected 4 tab-separated fields, got {}",
                    fields.len()
                ),
            ));
        }
        let number = |name: &str, v: &str| -> Result<f64> {
            v.parse().map_err(|_| {
                Error::format(path, format!("line {line_no}: {name} `{v}` is not a number"))
            })
        };
        let start = number("start", fields[2])?;
        let duration = number("duration", fields[3])?;
        if !(duration > 0.0) {
            return Err(Error::format(
                path,
                format!("line {line_no}: duration must be positive, got {duration}"),
            ));
        }
        if !(start >= 0.0) {
            return Err(Error::format(
                path,
                format!("line {line_no}: start must be non-negative, got {start}"),
            ));
        }
        rows.push(ManifestRow {
            recording_id: fields[0].to_string(),
            path: fields[1].to_string(),
            start,
            duration,
        });
    }
    Manifest::new(rows)
}
