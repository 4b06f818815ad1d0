//! Command-line front end: segment probability streams, synthesize
//! calibrated corpora, evaluate and align outputs, slice audio into
//! per-segment files, and price batch plans.
//!
//! Everything here is a thin wrapper over the library. Outputs are
//! deterministic given the inputs and seeds — no wall clock, locale, or
//! thread schedule leaks into any file or printed line — and every file is
//! written atomically. Exit codes: 0 success, 1 data error, 2 usage or
//! configuration error.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use probseg::segmenters::{
    default_lerps, DEFAULT_MAX_SECONDS, DEFAULT_MIN_SECONDS, DEFAULT_N_MA_SECONDS,
};
use probseg::{
    corrupt_to_probs, derive_seed, frame_prf, gen_reference, length_stats, overlap_metrics,
    read_labels, read_probs, read_segments, read_wav, resegment_align, seconds_to_frames, segment,
    segments_to_labels, simulate_batches, slice_wav, write_labels, write_manifest, write_probs,
    write_segments, write_text, Algorithm, AudioSpec, CorpusProfile, CostModel, Error,
    EvalReport, LengthStats, Manifest, ManifestRow, NoiseProfile, ProbStream, Result,
    SegmentList, SegmenterConfig, DEFAULT_TOKEN_BUDGET,
};

#[derive(Parser)]
#[command(
    name = "probseg",
    version,
    about = "Turn per-frame speech probabilities into translation-sized segments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment probability files; writes one .segs file per recording plus a manifest.
    Segment(SegmentArgs),
    /// Generate a synthetic corpus: reference segments, labels, and calibrated probabilities.
    Synth(SynthArgs),
    /// Score a hypothesis segmentation against a reference and/or frame labels.
    Eval(EvalArgs),
    /// Split hypothesis tokens into spans matching reference segments by edit distance.
    Align(AlignArgs),
    /// Cut a WAV recording into one file per segment.
    Slice(SliceArgs),
    /// Pack segments into padded batches and report the simulated decode cost.
    Bench(BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Segment(args) => cmd_segment(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Align(args) => cmd_align(args),
        Command::Slice(args) => cmd_slice(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    Algorithm::from_str(s).map_err(|e| e.to_string())
}

/// `println!`-alike that survives a reader closing the pipe early
/// (`probseg ... | head`): a broken pipe ends the process quietly with
/// success instead of panicking, any other stdout failure exits 1.
macro_rules! outln {
    ($($arg:tt)*) => { stdout_write(format_args!($($arg)*), true) };
}

/// [`outln!`] without the trailing newline, for preformatted blocks.
macro_rules! out {
    ($($arg:tt)*) => { stdout_write(format_args!($($arg)*), false) };
}

fn stdout_write(args: std::fmt::Arguments<'_>, newline: bool) {
    use std::io::Write as _;
    let mut handle = std::io::stdout().lock();
    let result = handle
        .write_fmt(args)
        .and_then(|()| if newline { handle.write_all(b"\n") } else { Ok(()) });
    if let Err(e) = result {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(1);
    }
}

/// Build a worker pool; 0 means one thread per core (rayon's default).
fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("--jobs: {e}")))
}

// ---------------------------------------------------------------------------
// segment

#[derive(Args)]
struct SegmentArgs {
    /// Probability files (.probs binary with sidecar metadata, .txt text).
    #[arg(required_unless_present = "show_config")]
    probs: Vec<PathBuf>,
    /// Directory receiving <recording_id>.segs files and manifest.tsv.
    #[arg(long, required_unless_present = "show_config")]
    out_dir: Option<PathBuf>,
    /// Segmenter: pdac, pstrm, pthr, or pthr_ma.
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    /// Maximum segment length, seconds.
    #[arg(long)]
    max: Option<f64>,
    /// Minimum useful segment length, seconds.
    #[arg(long)]
    min: Option<f64>,
    /// Opening / splitting threshold, in (0, 1).
    #[arg(long)]
    thr: Option<f64>,
    /// Moving-average window, seconds (pthr_ma only).
    #[arg(long)]
    n_ma: Option<f64>,
    /// Where the length filter finishes ramping up to thr, seconds
    /// (default: min + 10% of the min..max span).
    #[arg(long)]
    lerp_min: Option<f64>,
    /// Where the length filter starts ramping thr up to 1, seconds
    /// (default: max - 20% of the min..max span).
    #[arg(long)]
    lerp_max: Option<f64>,
    /// Worker threads across recordings; 0 = one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Histogram bin width for the printed length stats, seconds.
    #[arg(long)]
    bin_width: Option<f64>,
    /// Flat key=value file supplying any tunable above; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    show_config: bool,
}

/// Tunables after merging flags over the config file over defaults.
/// Durations stay in seconds here; they become frames per input stream.
struct SegmentSettings {
    algorithm: Algorithm,
    max: f64,
    min: f64,
    thr: f64,
    n_ma: f64,
    lerp_min: Option<f64>,
    lerp_max: Option<f64>,
    jobs: usize,
    bin_width: f64,
}

fn resolve_settings(args: &SegmentArgs) -> Result<SegmentSettings> {
    let mut algorithm = args.algorithm;
    let mut max = args.max;
    let mut min = args.min;
    let mut thr = args.thr;
    let mut n_ma = args.n_ma;
    let mut lerp_min = args.lerp_min;
    let mut lerp_max = args.lerp_max;
    let mut jobs = args.jobs;
    let mut bin_width = args.bin_width;

    if let Some(config) = &args.config {
        for (line_no, key, value) in parse_config_file(config)? {
            let place = |slot: &mut Option<f64>| -> Result<()> {
                if slot.is_none() {
                    *slot = Some(value.parse().map_err(|_| {
                        Error::InvalidArgument(format!(
                            "{} line {line_no}: {key} `{value}` is not a number",
                            config.display()
                        ))
                    })?);
                }
                Ok(())
            };
            match key.as_str() {
                "algorithm" => {
                    if algorithm.is_none() {
                        algorithm = Some(Algorithm::from_str(&value)?);
                    }
                }
                "max" => place(&mut max)?,
                "min" => place(&mut min)?,
                "thr" => place(&mut thr)?,
                "n_ma" => place(&mut n_ma)?,
                "lerp_min" => place(&mut lerp_min)?,
                "lerp_max" => place(&mut lerp_max)?,
                "bin_width" => place(&mut bin_width)?,
                "jobs" => {
                    if jobs.is_none() {
                        jobs = Some(value.parse().map_err(|_| {
                            Error::InvalidArgument(format!(
                                "{} line {line_no}: jobs `{value}` is not a count",
                                config.display()
                            ))
                        })?);
                    }
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "{} line {line_no}: unknown key `{other}`",
                        config.display()
                    )))
                }
            }
        }
    }

    let algorithm = algorithm.unwrap_or(Algorithm::PthrMa);
    Ok(SegmentSettings {
        algorithm,
        max: max.unwrap_or(DEFAULT_MAX_SECONDS),
        min: min.unwrap_or(DEFAULT_MIN_SECONDS),
        thr: thr.unwrap_or_else(|| algorithm.default_thr()),
        n_ma: n_ma.unwrap_or(match algorithm {
            Algorithm::PthrMa => DEFAULT_N_MA_SECONDS,
            _ => 0.0,
        }),
        lerp_min,
        lerp_max,
        jobs: jobs.unwrap_or(1),
        bin_width: bin_width.unwrap_or(2.0),
    })
}

/// Parse a flat key=value config file: one pair per line, blank lines and
/// `#` comments ignored.
fn parse_config_file(path: &Path) -> Result<Vec<(usize, String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidArgument(format!(
                "{} line {}: expected key=value, got `{line}`",
                path.display(),
                i + 1
            )));
        };
        pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Convert second-valued settings into a frame-valued config for one
/// stream's geometry.
fn build_config(settings: &SegmentSettings, spec: &AudioSpec) -> Result<SegmenterConfig> {
    let max = seconds_to_frames(settings.max, spec)?;
    let min = seconds_to_frames(settings.min, spec)?;
    let (auto_lerp_min, auto_lerp_max) = default_lerps(min, max);
    let lerp_min = match settings.lerp_min {
        Some(s) => seconds_to_frames(s, spec)?,
        None => auto_lerp_min,
    };
    let lerp_max = match settings.lerp_max {
        Some(s) => seconds_to_frames(s, spec)?,
        None => auto_lerp_max,
    };
    let cfg = SegmenterConfig {
        algorithm: settings.algorithm,
        max,
        min,
        thr: settings.thr,
        n_ma: seconds_to_frames(settings.n_ma, spec)?,
        lerp_min,
        lerp_max,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_segment(args: &SegmentArgs) -> Result<()> {
    let settings = resolve_settings(args)?;
    if args.show_config {
        // Derived lerp defaults are shown for the standard 16 kHz geometry.
        let cfg = build_config(&settings, &AudioSpec::default())?;
        let spec = AudioSpec::default();
        outln!("algorithm={}", settings.algorithm.as_str());
        outln!("max={}", settings.max);
        outln!("min={}", settings.min);
        outln!("thr={}", settings.thr);
        outln!("n_ma={}", settings.n_ma);
        outln!("lerp_min={}", spec.frames_to_seconds(cfg.lerp_min));
        outln!("lerp_max={}", spec.frames_to_seconds(cfg.lerp_max));
        outln!("jobs={}", settings.jobs);
        outln!("bin_width={}", settings.bin_width);
        return Ok(());
    }
    let out_dir = args.out_dir.as_ref().expect("clap requires --out-dir");
    fs::create_dir_all(out_dir)?;

    let pool = thread_pool(settings.jobs)?;
    let outputs: Vec<(SegmentList, LengthStats)> = pool.install(|| {
        args.probs
            .par_iter()
            .map(|path| {
                let stream = read_probs(path)?;
                let cfg = build_config(&settings, stream.spec())?;
                let segs = segment(&stream, &cfg)?;
                let stats = length_stats(&segs, settings.bin_width)?;
                Ok((segs, stats))
            })
            .collect::<Result<_>>()
    })?;

    let mut seen = HashSet::new();
    for (segs, _) in &outputs {
        if !seen.insert(segs.recording_id().to_string()) {
            return Err(Error::InvalidArgument(format!(
                "two inputs share the recording id `{}`",
                segs.recording_id()
            )));
        }
    }

    let mut rows = Vec::new();
    for ((segs, stats), source) in outputs.iter().zip(&args.probs) {
        write_segments(segs, &out_dir.join(format!("{}.segs", segs.recording_id())))?;
        for seg in segs.segments() {
            rows.push(ManifestRow {
                recording_id: segs.recording_id().to_string(),
                path: source.to_string_lossy().into_owned(),
                start: segs.spec().frames_to_seconds(seg.start),
                duration: seg.duration_seconds(segs.spec()),
            });
        }
        outln!(
            "{}: {} segments, mean {:.3} s, median {:.3} s",
            segs.recording_id(),
            stats.count,
            stats.mean,
            stats.median
        );
    }
    write_manifest(&Manifest::new(rows)?, &out_dir.join("manifest.tsv"))
}

// ---------------------------------------------------------------------------
// synth

#[derive(Args)]
struct SynthArgs {
    /// Directory receiving <id>.segs, <id>.labels, <id>.probs, manifest.tsv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Number of recordings to generate.
    #[arg(long, default_value_t = 1)]
    recordings: usize,
    /// Length of each recording, seconds.
    #[arg(long, default_value_t = 7200.0)]
    duration: f64,
    /// Base seed; each recording derives its own generators from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mean reference segment length, seconds.
    #[arg(long, default_value_t = 5.79)]
    mean_len: f64,
    /// Log-space spread of segment lengths.
    #[arg(long, default_value_t = 0.65)]
    len_sigma: f64,
    /// Mean gap between reference segments, seconds.
    #[arg(long, default_value_t = 1.0)]
    mean_gap: f64,
    /// Frame-level precision the corrupted stream is calibrated to.
    #[arg(long, default_value_t = 0.9802)]
    target_precision: f64,
    /// Frame-level recall the corrupted stream is calibrated to.
    #[arg(long, default_value_t = 0.8532)]
    target_recall: f64,
    /// Boundary placement error, seconds (standard deviation).
    #[arg(long, default_value_t = 0.02)]
    jitter: f64,
    /// Per-frame additive noise on the 0/1 signal (standard deviation).
    #[arg(long, default_value_t = 0.1)]
    noise_sigma: f64,
    /// Worker threads across recordings; 0 = one per core.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = AudioSpec::default();
    if args.recordings == 0 {
        return Err(Error::InvalidArgument(
            "--recordings must be at least 1".into(),
        ));
    }
    let total_frames = seconds_to_frames(args.duration, &spec)?;
    fs::create_dir_all(&args.out_dir)?;

    let pool = thread_pool(args.jobs)?;
    let generated: Vec<(SegmentList, ProbStream, f64, f64)> = pool.install(|| {
        (0..args.recordings)
            .into_par_iter()
            .map(|i| {
                let id = format!("rec_{i:04}");
                let profile = CorpusProfile {
                    mean_len: args.mean_len,
                    len_sigma: args.len_sigma,
                    mean_gap: args.mean_gap,
                    total_duration: args.duration,
                    seed: derive_seed(args.seed, 2 * i as u64),
                };
                let noise = NoiseProfile {
                    target_precision: args.target_precision,
                    target_recall: args.target_recall,
                    boundary_jitter: args.jitter,
                    per_frame_noise_sigma: args.noise_sigma,
                    seed: derive_seed(args.seed, 2 * i as u64 + 1),
                };
                let reference = gen_reference(&profile, &spec, &id)?;
                let probs = corrupt_to_probs(&reference, &noise, total_frames)?;
                let labels = segments_to_labels(&reference, total_frames)?;
                let prf = frame_prf(&probs, &labels, 0.5)?;
                Ok((reference, probs, prf.precision, prf.recall))
            })
            .collect::<Result<_>>()
    })?;

    let mut rows = Vec::new();
    let (mut p_sum, mut r_sum) = (0.0, 0.0);
    for (reference, probs, precision, recall) in &generated {
        let id = reference.recording_id();
        let probs_path = args.out_dir.join(format!("{id}.probs"));
        write_segments(reference, &args.out_dir.join(format!("{id}.segs")))?;
        write_labels(
            &segments_to_labels(reference, total_frames)?,
            &args.out_dir.join(format!("{id}.labels")),
        )?;
        write_probs(probs, &probs_path)?;
        for seg in reference.segments() {
            rows.push(ManifestRow {
                recording_id: id.to_string(),
                path: probs_path.to_string_lossy().into_owned(),
                start: spec.frames_to_seconds(seg.start),
                duration: seg.duration_seconds(&spec),
            });
        }
        outln!("{id}: precision={precision:.4} recall={recall:.4}");
        p_sum += precision;
        r_sum += recall;
    }
    write_manifest(&Manifest::new(rows)?, &args.out_dir.join("manifest.tsv"))?;
    let n = generated.len() as f64;
    outln!(
        "corpus: recordings={} precision={:.4} recall={:.4}",
        generated.len(),
        p_sum / n,
        r_sum / n
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

#[derive(Args)]
struct EvalArgs {
    /// Hypothesis segment list (.segs).
    #[arg(long)]
    hyp: PathBuf,
    /// Reference segment list (.segs) for overlap metrics and stats.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    /// Reference frame labels (.labels); with --probs enables frame P/R/F1.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Probability stream scored against --labels.
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Histogram bin width, seconds.
    #[arg(long, default_value_t = 2.0)]
    bin_width: f64,
    /// Directory receiving report.txt and length histogram CSVs.
    #[arg(long)]
    out_dir: PathBuf,
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let hyp = read_segments(&args.hyp)?;
    let hyp_stats = length_stats(&hyp, args.bin_width)?;

    let mut overlap = None;
    let mut ref_stats = None;
    if let Some(ref_path) = &args.reference {
        let reference = read_segments(ref_path)?;
        overlap = Some(overlap_metrics(&hyp, &reference)?);
        ref_stats = Some(length_stats(&reference, args.bin_width)?);
    }

    let prf = match (&args.probs, &args.labels) {
        (Some(probs_path), Some(labels_path)) => {
            let probs = read_probs(probs_path)?;
            let labels = read_labels(labels_path)?;
            Some(frame_prf(&probs, &labels, 0.5)?)
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(Error::InvalidArgument(
                "frame metrics need both --probs and --labels".into(),
            ))
        }
        (None, None) => None,
    };

    let report = EvalReport {
        prf,
        overlap,
        hyp_stats,
        ref_stats,
    };
    fs::create_dir_all(&args.out_dir)?;
    let text = report.to_text();
    write_text(&args.out_dir.join("report.txt"), &text)?;
    write_text(
        &args.out_dir.join("hyp_lengths.csv"),
        &report.hyp_stats.histogram_csv(),
    )?;
    if let Some(stats) = &report.ref_stats {
        write_text(&args.out_dir.join("ref_lengths.csv"), &stats.histogram_csv())?;
    }
    out!("{text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// align

#[derive(Args)]
struct AlignArgs {
    /// Hypothesis tokens: whitespace-separated text file.
    #[arg(long)]
    hyp: PathBuf,
    /// Reference segments: one line of whitespace-separated tokens each.
    #[arg(long)]
    refs: PathBuf,
    /// Output TSV (start, end, distance per segment); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_align(args: &AlignArgs) -> Result<()> {
    let hyp_text = fs::read_to_string(&args.hyp)?;
    let hyp: Vec<String> = hyp_text.split_whitespace().map(String::from).collect();
    let refs_text = fs::read_to_string(&args.refs)?;
    let refs: Vec<Vec<String>> = refs_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();

    let alignment = resegment_align(&hyp, &refs)?;
    let mut out = String::new();
    let _ = writeln!(out, "# total_distance={}", alignment.total_distance);
    let _ = writeln!(out, "start\tend\tdistance");
    for (span, dist) in alignment
        .spans
        .iter()
        .zip(&alignment.per_segment_distance)
    {
        let _ = writeln!(out, "{}\t{}\t{}", span.0, span.1, dist);
    }
    match &args.out {
        Some(path) => write_text(path, &out),
        None => {
            out!("{out}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// slice

#[derive(Args)]
struct SliceArgs {
    /// Source recording (16-bit PCM mono WAV).
    #[arg(long)]
    wav: PathBuf,
    /// Segment list to cut along (.segs).
    #[arg(long)]
    segs: PathBuf,
    /// Directory receiving the per-segment WAV files and manifest.tsv.
    #[arg(long)]
    out_dir: PathBuf,
}

fn cmd_slice(args: &SliceArgs) -> Result<()> {
    let (samples, wav_spec) = read_wav(&args.wav)?;
    let segs = read_segments(&args.segs)?;
    let manifest = slice_wav(&samples, &wav_spec, &segs, &args.out_dir)?;
    write_manifest(&manifest, &args.out_dir.join("manifest.tsv"))?;
    outln!(
        "wrote {} slices of {} to {}",
        manifest.len(),
        segs.recording_id(),
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// bench

#[derive(Args)]
struct BenchArgs {
    /// Segment list to pack (.segs).
    #[arg(long)]
    segs: PathBuf,
    /// Padded frames allowed per batch.
    #[arg(long, default_value_t = DEFAULT_TOKEN_BUDGET)]
    token_budget: usize,
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let segs = read_segments(&args.segs)?;
    let (plan, cost) = simulate_batches(&segs, args.token_budget, &CostModel::default())?;
    let padded: usize = plan.padded_frames.iter().sum();
    outln!(
        "segments={} batches={} padded_frames={} waste_ratio={:.4} simulated_cost={:.3}",
        segs.count(),
        plan.batches.len(),
        padded,
        plan.waste_ratio,
        cost
    );
    Ok(())
}
