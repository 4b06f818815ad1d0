//! Synthetic reference segmentations and calibrated probability streams.
//!
//! Stands in for a trained frame classifier: [`gen_reference`] draws a
//! plausible reference segmentation (log-normal segment lengths, exponential
//! gaps) and [`corrupt_to_probs`] turns it into a probability stream whose
//! frame-level precision and recall against that reference hit requested
//! targets within ±0.01.
//!
//! The corruption model is a declared stand-in, not a claim about real
//! classifier error structure. It has three ingredients, chosen so the
//! stream also *behaves* like an imperfect classifier under the segmenters:
//!
//! * **signed edge errors** — each segment edge either *recedes* (the
//!   classifier comes up late / fades out early, losing true frames) or
//!   *bleeds* outward into the surrounding gap (false positives hugging the
//!   boundary). Which way each edge goes is drawn once; scaling the receding
//!   stretches is the recall knob, scaling the bleed is the precision knob.
//!   An edge moves one way or the other, never both, so every segment stays
//!   one contiguous stretch of high probability,
//! * **interior dropouts** — rare 1–2 frame dips inside segments, fixed
//!   texture that fragments a raw threshold scan but vanishes under a short
//!   moving average,
//! * **per-frame noise** — Gaussian noise on the 0/1 signal, squashed
//!   through a steep logistic so values stay in (0, 1) and no two quiet
//!   frames tie exactly.
//!
//! Both knobs are calibrated by bisection against the reference labels; all
//! random fields are drawn once up front, so calibration is deterministic
//! and the result depends only on the profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, StandardNormal};

use crate::error::{Error, Result};
use crate::frame::{
    seconds_to_frames, segments_to_labels, AudioSpec, ProbStream, Segment, SegmentList,
};

/// Shape of a synthetic reference segmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusProfile {
    /// Mean segment length in seconds.
    pub mean_len: f64,
    /// Log-space standard deviation of segment lengths.
    pub len_sigma: f64,
    /// Mean gap between segments in seconds.
    pub mean_gap: f64,
    /// Recording length in seconds; the last segment is truncated to fit.
    pub total_duration: f64,
    pub seed: u64,
}

impl Default for CorpusProfile {
    fn default() -> Self {
        // Mean 5.79 s with sigma 0.65 puts the mode near 3 s — long right
        // tail, plenty of short segments, like manual talk transcripts.
        CorpusProfile {
            mean_len: 5.79,
            len_sigma: 0.65,
            mean_gap: 1.0,
            total_duration: 7200.0,
            seed: 0,
        }
    }
}

impl CorpusProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_len > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mean_len must be positive, got {}",
                self.mean_len
            )));
        }
        if !(self.len_sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "len_sigma must be non-negative, got {}",
                self.len_sigma
            )));
        }
        if !(self.mean_gap >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mean_gap must be non-negative, got {}",
                self.mean_gap
            )));
        }
        if !(self.total_duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "total_duration must be positive, got {}",
                self.total_duration
            )));
        }
        Ok(())
    }
}

/// Target operating point and noise texture for [`corrupt_to_probs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile {
    /// Frame-level precision to calibrate to, in (0, 1].
    pub target_precision: f64,
    /// Frame-level recall to calibrate to, in (0, 1].
    pub target_recall: f64,
    /// Standard deviation of boundary placement error, seconds.
    pub boundary_jitter: f64,
    /// Standard deviation of per-frame additive noise on the 0/1 signal.
    pub per_frame_noise_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        NoiseProfile {
            target_precision: 0.9802,
            target_recall: 0.8532,
            boundary_jitter: 0.02,
            per_frame_noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl NoiseProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("target_precision", self.target_precision),
            ("target_recall", self.target_recall),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        if !(self.boundary_jitter >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "boundary_jitter must be non-negative, got {}",
                self.boundary_jitter
            )));
        }
        if !(self.per_frame_noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "per_frame_noise_sigma must be non-negative, got {}",
                self.per_frame_noise_sigma
            )));
        }
        Ok(())
    }
}

/// Mix a base seed with a stream index into an independent 64-bit seed
/// (splitmix64 finalizer). Used to give each recording of a corpus its own
/// generator while keeping the whole corpus a function of one seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw a reference segmentation: alternating exponential gaps and
/// log-normal segment lengths until `total_duration` runs out. The
/// log-space mean is shifted by sigma²/2 so the arithmetic mean length is
/// exactly `mean_len` (the median lands below it, skewing short).
pub fn gen_reference(
    profile: &CorpusProfile,
    spec: &AudioSpec,
    recording_id: impl Into<String>,
) -> Result<SegmentList> {
    profile.validate()?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let mu = profile.mean_len.ln() - profile.len_sigma * profile.len_sigma / 2.0;
    let len_dist = LogNormal::new(mu, profile.len_sigma)
        .map_err(|e| Error::InvalidArgument(format!("length distribution: {e}")))?;
    let gap_dist = if profile.mean_gap > 0.0 {
        Some(
            Exp::new(1.0 / profile.mean_gap)
                .map_err(|e| Error::InvalidArgument(format!("gap distribution: {e}")))?,
        )
    } else {
        None
    };

    let mut segments = Vec::new();
    let mut t = 0.0_f64;
    loop {
        let gap = gap_dist.as_ref().map_or(0.0, |d| d.sample(&mut rng));
        let len: f64 = len_dist.sample(&mut rng);
        let seg_start = t + gap;
        let seg_end = (seg_start + len).min(profile.total_duration);
        if seg_start >= profile.total_duration {
            break;
        }
        let start_f = seconds_to_frames(seg_start, spec)?;
        let end_f = seconds_to_frames(seg_end, spec)?;
        if end_f > start_f {
            segments.push(Segment::new(start_f, end_f));
        }
        t = seg_start + len;
        if t >= profile.total_duration {
            break;
        }
    }
    SegmentList::new(segments, *spec, recording_id)
}

// Fixed texture constants of the corruption model. These are not exposed as
// knobs: the calibration targets plus the two NoiseProfile magnitudes pin
// everything observable.

/// Length scale (frames) of a receding edge's lost stretch; 0.5 s.
const EROSION_SCALE_FRAMES: f64 = 25.0;
/// Length scale (frames) of a bleeding edge's outward stretch; 0.1 s.
const DILATION_SCALE_FRAMES: f64 = 5.0;
/// Interior dropout rate per frame per unit of noise sigma.
const DROPOUT_RATE_PER_SIGMA: f64 = 0.04;
/// Gain of the logistic squash mapping signal+noise to a probability.
const SQUASH_GAIN: f64 = 8.0;
/// Bisection passes per knob and refinement rounds over both knobs.
const BISECT_STEPS: usize = 60;
const CALIBRATION_ROUNDS: usize = 2;
/// Calibration aims inside this slack so the ±0.01 contract has margin.
const CALIBRATION_SLACK: f64 = 0.009;

/// Everything drawn once per corruption run; calibration re-evaluates the
/// knobs `(a, b)` against these fixed fields.
struct NoiseFields {
    /// Segment runs after boundary jitter, merged where jitter overlapped.
    runs: Vec<(usize, usize)>,
    /// Jittered labels with interior dropouts already punched out.
    base_x: Vec<bool>,
    /// Per-run (start-edge, end-edge): true if the edge recedes inward,
    /// false if it bleeds outward.
    edge_recedes: Vec<(bool, bool)>,
    /// Per-run (start-edge, end-edge) Exp(1) error length factors.
    edge_mag: Vec<(f64, f64)>,
    /// Whether a frame classifies as 1 after noise, given signal 1 / 0.
    pred_if_one: Vec<bool>,
    pred_if_zero: Vec<bool>,
    /// Per-frame standard normal noise, for the final squash.
    noise: Vec<f64>,
}

fn draw_fields(
    reference: &SegmentList,
    noise: &NoiseProfile,
    total_frames: usize,
    spec: &AudioSpec,
) -> NoiseFields {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let jitter_frames = noise.boundary_jitter * spec.frames_per_second();

    // 1. Jitter each boundary, paint onto a grid, re-extract maximal runs
    //    (overlapping jittered segments merge).
    let mut grid = vec![false; total_frames];
    for seg in reference.segments() {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let s = (seg.start as f64 + z0 * jitter_frames).round();
        let e = (seg.end as f64 + z1 * jitter_frames).round();
        let s = (s.max(0.0) as usize).min(total_frames);
        let e = (e.max(0.0) as usize).min(total_frames);
        let (s, e) = if s < e { (s, e) } else { (seg.start, seg.end.min(total_frames)) };
        for g in &mut grid[s..e] {
            *g = true;
        }
    }
    let mut runs = Vec::new();
    let mut run_start = None;
    for (i, &g) in grid.iter().enumerate() {
        match (g, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        runs.push((s, total_frames));
    }

    // 2. Per-run edge kinds (recede vs bleed, a fair coin each), then the
    //    per-edge error length factors.
    let exp1 = Exp::new(1.0).expect("unit rate");
    let edge_recedes: Vec<(bool, bool)> = runs
        .iter()
        .map(|_| (rng.gen::<f64>() < 0.5, rng.gen::<f64>() < 0.5))
        .collect();
    let edge_mag: Vec<(f64, f64)> = runs
        .iter()
        .map(|_| (exp1.sample(&mut rng), exp1.sample(&mut rng)))
        .collect();

    // 3. Interior dropouts: short dips a smoothing window rides over but a
    //    raw threshold scan stumbles on.
    let mut base_x = grid;
    let dropout_rate = DROPOUT_RATE_PER_SIGMA * noise.per_frame_noise_sigma;
    for &(rs, re) in &runs {
        let mut i = rs;
        while i < re {
            let u: f64 = rng.gen();
            if u < dropout_rate {
                let len = if u < dropout_rate * 0.3 { 2 } else { 1 };
                for x in &mut base_x[i..(i + len).min(re)] {
                    *x = false;
                }
                i += len;
            } else {
                i += 1;
            }
        }
    }

    // 4. Per-frame noise and the classification it implies at the 0.5 cut.
    let sigma = noise.per_frame_noise_sigma;
    let mut noise_field = Vec::with_capacity(total_frames);
    let mut pred_if_one = Vec::with_capacity(total_frames);
    let mut pred_if_zero = Vec::with_capacity(total_frames);
    for _ in 0..total_frames {
        let n: f64 = rng.sample(StandardNormal);
        noise_field.push(n);
        pred_if_one.push(1.0 + sigma * n > 0.5);
        pred_if_zero.push(sigma * n > 0.5);
    }

    NoiseFields {
        runs,
        base_x,
        edge_recedes,
        edge_mag,
        pred_if_one,
        pred_if_zero,
        noise: noise_field,
    }
}

/// Apply the knobs to the pre-drawn fields. A receding edge loses an
/// `a`-scaled stretch of its run; a bleeding edge paints a `b`-scaled
/// stretch of the adjacent gap, clipped at the neighbouring run so bleed
/// never reaches into another run's edge zone.
fn apply_knobs(fields: &NoiseFields, a: f64, b: f64, x: &mut Vec<bool>) {
    x.clear();
    x.extend_from_slice(&fields.base_x);
    let total = x.len();
    let runs = &fields.runs;
    for i in 0..runs.len() {
        let (rs, re) = runs[i];
        let (recede_s, recede_e) = fields.edge_recedes[i];
        let (mag_s, mag_e) = fields.edge_mag[i];
        if recede_s {
            let ls = (a * mag_s * EROSION_SCALE_FRAMES).floor() as usize;
            for f in &mut x[rs..(rs + ls).min(re)] {
                *f = false;
            }
        } else {
            let le = (b * mag_s * DILATION_SCALE_FRAMES).floor() as usize;
            let gap_start = if i > 0 { runs[i - 1].1 } else { 0 };
            for f in &mut x[rs.saturating_sub(le).max(gap_start)..rs] {
                *f = true;
            }
        }
        if recede_e {
            let ls = (a * mag_e * EROSION_SCALE_FRAMES).floor() as usize;
            for f in &mut x[re.saturating_sub(ls).max(rs)..re] {
                *f = false;
            }
        } else {
            let le = (b * mag_e * DILATION_SCALE_FRAMES).floor() as usize;
            let gap_end = if i + 1 < runs.len() { runs[i + 1].0 } else { total };
            for f in &mut x[re..(re + le).min(gap_end)] {
                *f = true;
            }
        }
    }
}

/// Precision and recall of the corrupted signal against the true labels.
fn measure(fields: &NoiseFields, labels: &[bool], x: &[bool]) -> (f64, f64) {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for i in 0..labels.len() {
        let pred = if x[i] {
            fields.pred_if_one[i]
        } else {
            fields.pred_if_zero[i]
        };
        match (pred, labels[i]) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    (precision, recall)
}

/// Bisect one knob over `[0, hi]` (hi found by doubling) to bring `achieve`
/// as close to `target` as possible; `achieve` must be non-increasing in
/// the knob. Returns the best knob value seen.
fn bisect_knob(target: f64, mut achieve: impl FnMut(f64) -> f64) -> f64 {
    let mut best = (0.0, (achieve(0.0) - target).abs());
    let mut hi = 1.0;
    let mut doublings = 0;
    while achieve(hi) > target && doublings < 40 {
        hi *= 2.0;
        doublings += 1;
    }
    let mut lo = 0.0;
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        let got = achieve(mid);
        let err = (got - target).abs();
        if err < best.1 {
            best = (mid, err);
        }
        if got > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if err < 5e-4 {
            break;
        }
    }
    best.0
}

/// Squash signal+noise into a probability with a steep logistic centred on
/// 0.5. The map is strictly monotone, so the 0.5 binarization of the output
/// equals the 0.5 binarization of the input, and (noise being continuous)
/// no two frames tie exactly — a split-point search over the stream behaves
/// like it would on real classifier output rather than snapping to the
/// first of thousands of identical zeros.
fn squash(v: f64) -> f32 {
    (1.0 / (1.0 + (-SQUASH_GAIN * (v - 0.5)).exp())) as f32
}

/// Corrupt a reference segmentation into a probability stream hitting the
/// profile's precision/recall targets within ±0.01 (measured at the 0.5
/// binarization [`crate::eval::frame_prf`] uses). Deterministic given the
/// profile; unreachable targets produce a calibration error reporting what
/// was achieved.
pub fn corrupt_to_probs(
    reference: &SegmentList,
    noise: &NoiseProfile,
    total_frames: usize,
) -> Result<ProbStream> {
    noise.validate()?;
    let spec = *reference.spec();
    let labels = segments_to_labels(reference, total_frames)?;
    let labels = labels.labels();

    let fields = draw_fields(reference, noise, total_frames, &spec);
    let mut x = Vec::with_capacity(total_frames);

    let (mut a, mut b) = (0.0, 0.0);
    for _ in 0..CALIBRATION_ROUNDS {
        a = bisect_knob(noise.target_recall, |knob| {
            apply_knobs(&fields, knob, b, &mut x);
            measure(&fields, labels, &x).1
        });
        b = bisect_knob(noise.target_precision, |knob| {
            apply_knobs(&fields, a, knob, &mut x);
            measure(&fields, labels, &x).0
        });
    }

    apply_knobs(&fields, a, b, &mut x);
    let (precision, recall) = measure(&fields, labels, &x);
    if (precision - noise.target_precision).abs() > CALIBRATION_SLACK
        || (recall - noise.target_recall).abs() > CALIBRATION_SLACK
    {
        return Err(Error::Calibration {
            achieved_precision: precision,
            achieved_recall: recall,
            target_precision: noise.target_precision,
            target_recall: noise.target_recall,
        });
    }

    // Zero noise means hard labels: emit exact 0/1 rather than the logistic
    // rails, so a noiseless profile reproduces its labels bit-for-bit.
    let sigma = noise.per_frame_noise_sigma;
    let probs: Vec<f32> = if sigma == 0.0 {
        x.iter().map(|&xi| if xi { 1.0 } else { 0.0 }).collect()
    } else {
        x.iter()
            .zip(&fields.noise)
            .map(|(&xi, &n)| squash(f64::from(u8::from(xi)) + sigma * n))
            .collect()
    };
    Ok(ProbStream::from_validated(
        probs,
        spec,
        reference.recording_id(),
    ))
}
