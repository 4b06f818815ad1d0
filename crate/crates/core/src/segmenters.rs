//! The four segmentation algorithms mapping a probability stream to a
//! segment list.
//!
//! All four share one config and one contract: output segments are sorted,
//! non-overlapping, and deterministic. They differ in how they pick cut
//! points:
//!
//! * `pdac` — offline divide-and-conquer: recursively split at the
//!   least-probable frame until every piece is shorter than `max`.
//! * `pstrm` — online: buffer up to `max` frames, cut at the midpoint of
//!   the longest pause in the buffer (or at `max` if there is none).
//! * `pthr` — online threshold scan: open a segment when probability rises
//!   above `thr`, close it when probability falls under a position-dependent
//!   threshold filter.
//! * `pthr_ma` — `pthr` on a moving-average-smoothed stream.

use crate::error::{Error, Result};
use crate::frame::{seconds_to_frames, AudioSpec, ProbStream, Segment, SegmentList};
use crate::smoothing::{moving_average, SmoothingConfig};

/// Default segment-length cap in seconds (1400 frames at the default spec).
pub const DEFAULT_MAX_SECONDS: f64 = 28.0;
/// Default minimum-length target in seconds (10 frames at the default spec).
pub const DEFAULT_MIN_SECONDS: f64 = 0.2;
/// Default smoothing window in seconds for `pthr_ma` (5 frames).
pub const DEFAULT_N_MA_SECONDS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Pdac,
    Pstrm,
    Pthr,
    PthrMa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Pdac,
        Algorithm::Pstrm,
        Algorithm::Pthr,
        Algorithm::PthrMa,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Pdac => "pdac",
            Algorithm::Pstrm => "pstrm",
            Algorithm::Pthr => "pthr",
            Algorithm::PthrMa => "pthr_ma",
        }
    }

    /// The operating threshold each algorithm is normally run at: the
    /// threshold scanners work best opening early (0.1), the splitters cut
    /// at the even-odds point (0.5).
    pub fn default_thr(&self) -> f64 {
        match self {
            Algorithm::Pthr | Algorithm::PthrMa => 0.1,
            Algorithm::Pdac | Algorithm::Pstrm => 0.5,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algorithm> {
        match s {
            "pdac" => Ok(Algorithm::Pdac),
            "pstrm" => Ok(Algorithm::Pstrm),
            "pthr" => Ok(Algorithm::Pthr),
            "pthr_ma" => Ok(Algorithm::PthrMa),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm {other:?} (expected pdac, pstrm, pthr, or pthr_ma)"
            ))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Shared knobs for all four algorithms. Lengths are frame counts; convert
/// from seconds at the boundary with [`seconds_to_frames`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmenterConfig {
    pub algorithm: Algorithm,
    /// Hard cap on emitted segment length.
    pub max: usize,
    /// Minimum useful segment length; `pdac` rejects splits whose children
    /// would not exceed it, `pstrm` refuses cuts closer than it, and the
    /// threshold filter stays at 0 below it.
    pub min: usize,
    /// Opening / trimming threshold.
    pub thr: f64,
    /// Moving-average window in frames; read only by `pthr_ma`.
    pub n_ma: usize,
    /// Frame offset where the threshold filter finishes ramping 0 → thr.
    pub lerp_min: usize,
    /// Frame offset where the threshold filter starts ramping thr → 1.
    pub lerp_max: usize,
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max == 0 {
            return Err(Error::InvalidArgument(
                "max must be at least 1 frame".into(),
            ));
        }
        if !(self.min <= self.lerp_min
            && self.lerp_min <= self.lerp_max
            && self.lerp_max <= self.max)
        {
            return Err(Error::InvalidArgument(format!(
                "config must satisfy min <= lerp_min <= lerp_max <= max, \
                 got min={} lerp_min={} lerp_max={} max={}",
                self.min, self.lerp_min, self.lerp_max, self.max
            )));
        }
        if !(self.thr > 0.0 && self.thr < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "thr must lie strictly between 0 and 1, got {}",
                self.thr
            )));
        }
        Ok(())
    }

    /// Standard operating configuration for an algorithm at a given frame
    /// geometry: max 28 s, min 0.2 s, the algorithm's usual threshold, and a
    /// 0.1 s smoothing window for `pthr_ma`.
    pub fn defaults_for(algorithm: Algorithm, spec: &AudioSpec) -> Result<SegmenterConfig> {
        let max = seconds_to_frames(DEFAULT_MAX_SECONDS, spec)?;
        let min = seconds_to_frames(DEFAULT_MIN_SECONDS, spec)?;
        let (lerp_min, lerp_max) = default_lerps(min, max);
        let n_ma = match algorithm {
            Algorithm::PthrMa => seconds_to_frames(DEFAULT_N_MA_SECONDS, spec)?,
            _ => 0,
        };
        let cfg = SegmenterConfig {
            algorithm,
            max,
            min,
            thr: algorithm.default_thr(),
            n_ma,
            lerp_min,
            lerp_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Default ramp anchors: the low ramp ends a tenth of the way through the
/// `[min, max]` span, the high ramp occupies the last fifth. A gentle bias
/// toward mid-length segments without forcing cuts early.
pub fn default_lerps(min: usize, max: usize) -> (usize, usize) {
    let span = max.saturating_sub(min) as f64;
    let lerp_min = min + (span * 0.1).round() as usize;
    let lerp_max = max - (span * 0.2).round() as usize;
    (lerp_min, lerp_max)
}

/// Position-indexed closing thresholds for the `pthr` scan, one per frame
/// offset inside an open segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdFilter {
    thrs: Vec<f64>,
}

impl ThresholdFilter {
    pub fn values(&self) -> &[f64] {
        &self.thrs
    }

    pub fn len(&self) -> usize {
        self.thrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thrs.is_empty()
    }
}

/// Build the closing-threshold filter of length `max`: zero below `min`
/// (nothing closes a segment that young, short of an exact-zero frame),
/// a linear climb to `thr` at `lerp_min`, flat `thr` through `lerp_max`,
/// then a linear climb that reaches 1 on the final frame so segments close
/// on the first hesitation as they near `max`.
pub fn build_threshold_filter(cfg: &SegmenterConfig) -> Result<ThresholdFilter> {
    cfg.validate()?;
    let mut thrs = vec![0.0; cfg.max];
    for i in cfg.min..cfg.lerp_min {
        thrs[i] = cfg.thr * (i - cfg.min) as f64 / (cfg.lerp_min - cfg.min) as f64;
    }
    for i in cfg.lerp_min..cfg.lerp_max {
        thrs[i] = cfg.thr;
    }
    // The high ramp steps up immediately past lerp_max and hits exactly 1.0
    // at max-1, so a maximally confident stream still closes by max. The
    // convex form thr·(1-w) + w (rather than thr + (1-thr)·w) keeps the
    // endpoint exact: w is exactly 1.0 on the last frame, and thr + (1-thr)
    // can land one ulp off 1.0 for arbitrary thr.
    let rise = (cfg.max - cfg.lerp_max) as f64;
    for i in cfg.lerp_max..cfg.max {
        let w = (i - cfg.lerp_max + 1) as f64 / rise;
        thrs[i] = cfg.thr * (1.0 - w) + w;
    }
    Ok(ThresholdFilter { thrs })
}

/// Shrink a segment to its first and last frames with probability above
/// `thr`; `None` when no frame qualifies.
pub fn trim(sgm: Segment, probs: &[f32], thr: f64) -> Option<Segment> {
    let first = (sgm.start..sgm.end).find(|&i| f64::from(probs[i]) > thr)?;
    let last = (sgm.start..sgm.end)
        .rev()
        .find(|&i| f64::from(probs[i]) > thr)
        .expect("a first frame above thr implies a last one");
    Some(Segment::new(first, last + 1))
}

/// Online threshold scan. A segment opens at the first frame with
/// probability above `thr` and closes at the first later offset `j` where
/// probability drops to the filter (`p[start+j] <= thrs[j]`), or at
/// `start+max` if the filter never catches it, clamped to the stream end.
/// The closing frame is not consumed: after a forced cut it may immediately
/// open the next segment. Every emitted segment has length in `[1, max]`.
pub fn pthr(stream: &ProbStream, cfg: &SegmenterConfig) -> Result<SegmentList> {
    let filter = build_threshold_filter(cfg)?;
    let thrs = filter.values();
    let p = stream.probs();
    let n = p.len();
    let mut segments = Vec::new();
    let mut i = 0;
    while i < n {
        if f64::from(p[i]) <= cfg.thr {
            i += 1;
            continue;
        }
        let start = i;
        let stop = (start + cfg.max).min(n);
        let mut close = stop;
        for j in 1..(stop - start) {
            if f64::from(p[start + j]) <= thrs[j] {
                close = start + j;
                break;
            }
        }
        segments.push(Segment::new(start, close));
        i = close;
    }
    Ok(
        SegmentList::new(segments, *stream.spec(), stream.recording_id())
            .expect("scan emits sorted, disjoint segments"),
    )
}

/// [`pthr`] over a moving-average-smoothed copy of the stream; `n_ma <= 1`
/// makes it byte-for-byte equivalent to plain `pthr`.
pub fn pthr_ma(stream: &ProbStream, cfg: &SegmenterConfig) -> Result<SegmentList> {
    cfg.validate()?;
    let smoothed = moving_average(stream, SmoothingConfig::new(cfg.n_ma))?;
    pthr(&smoothed, cfg)
}

/// Offline divide-and-conquer. A piece shorter than `max` is emitted as-is.
/// Anything longer is split at a candidate frame — candidates are tried in
/// ascending probability order, ties to the lower index — such that both
/// sides, after dropping the split frame itself and trimming to their outer
/// above-`thr` frames, are longer than `min`. If every candidate fails the
/// piece is emitted unsplit rather than looping forever.
pub fn pdac(stream: &ProbStream, cfg: &SegmenterConfig) -> Result<SegmentList> {
    cfg.validate()?;
    let p = stream.probs();
    let mut segments = Vec::new();
    if !p.is_empty() {
        // Explicit stack, left child pushed last so output stays in
        // temporal order without a sort at the end.
        let mut stack = vec![Segment::new(0, p.len())];
        let mut order: Vec<usize> = Vec::new();
        while let Some(sgm) = stack.pop() {
            if sgm.frames() < cfg.max {
                segments.push(sgm);
                continue;
            }
            match split_candidate(sgm, p, cfg, &mut order) {
                Some((left, right)) => {
                    stack.push(right);
                    stack.push(left);
                }
                None => segments.push(sgm),
            }
        }
    }
    Ok(
        SegmentList::new(segments, *stream.spec(), stream.recording_id())
            .expect("children never overlap their split frame"),
    )
}

/// First workable split of `sgm`: candidates in ascending `(probability,
/// index)` order; a candidate `k` is accepted when both trimmed children
/// `[start, k)` and `[k+1, end)` exceed `min` frames.
fn split_candidate(
    sgm: Segment,
    p: &[f32],
    cfg: &SegmenterConfig,
    order: &mut Vec<usize>,
) -> Option<(Segment, Segment)> {
    order.clear();
    order.extend(sgm.start..sgm.end);
    order.sort_unstable_by(|&a, &b| {
        p[a].partial_cmp(&p[b])
            .expect("probabilities are never NaN")
            .then(a.cmp(&b))
    });
    for &k in order.iter() {
        let left = (k > sgm.start)
            .then(|| Segment::new(sgm.start, k))
            .and_then(|s| trim(s, p, cfg.thr));
        let right = (k + 1 < sgm.end)
            .then(|| Segment::new(k + 1, sgm.end))
            .and_then(|s| trim(s, p, cfg.thr));
        if let (Some(l), Some(r)) = (left, right) {
            if l.frames() > cfg.min && r.frames() > cfg.min {
                return Some((l, r));
            }
        }
    }
    None
}

/// Online length-triggered splitter. Once `max` frames have accumulated,
/// cut at the midpoint of the longest pause (maximal run of frames at or
/// below `thr`) whose midpoint lies at least `min` frames in; with no such
/// pause, cut at `max`. Each emitted chunk is trimmed — a chunk of pure
/// pause vanishes — and scanning resumes at the cut. The remainder after
/// the last cut is flushed as a final trimmed chunk.
pub fn pstrm(stream: &ProbStream, cfg: &SegmenterConfig) -> Result<SegmentList> {
    cfg.validate()?;
    let p = stream.probs();
    let n = p.len();
    let mut segments = Vec::new();
    let mut seg_start = 0;
    while n - seg_start >= cfg.max {
        let window_end = seg_start + cfg.max;
        let cut = longest_pause_midpoint(p, seg_start, window_end, cfg).unwrap_or(window_end);
        if let Some(sgm) = trim(Segment::new(seg_start, cut), p, cfg.thr) {
            segments.push(sgm);
        }
        seg_start = cut;
    }
    if seg_start < n {
        if let Some(sgm) = trim(Segment::new(seg_start, n), p, cfg.thr) {
            segments.push(sgm);
        }
    }
    Ok(
        SegmentList::new(segments, *stream.spec(), stream.recording_id())
            .expect("cuts advance monotonically"),
    )
}

/// Midpoint of the longest pause inside `[window_start, window_end)` whose
/// midpoint is at least `min` frames past the window start; ties go to the
/// earliest pause. The midpoint must also make progress (lie strictly past
/// the window start), which only matters for `min = 0`.
fn longest_pause_midpoint(
    p: &[f32],
    window_start: usize,
    window_end: usize,
    cfg: &SegmenterConfig,
) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None; // (run length, midpoint)
    let mut run_start = None;
    for i in window_start..=window_end {
        let low = i < window_end && f64::from(p[i]) <= cfg.thr;
        match (low, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let mid = (s + i) / 2;
                if mid > window_start
                    && mid >= window_start + cfg.min
                    && best.is_none_or(|(len, _)| i - s > len)
                {
                    best = Some((i - s, mid));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    best.map(|(_, mid)| mid)
}

/// Run the algorithm selected by `cfg.algorithm`.
pub fn segment(stream: &ProbStream, cfg: &SegmenterConfig) -> Result<SegmentList> {
    match cfg.algorithm {
        Algorithm::Pdac => pdac(stream, cfg),
        Algorithm::Pstrm => pstrm(stream, cfg),
        Algorithm::Pthr => pthr(stream, cfg),
        Algorithm::PthrMa => pthr_ma(stream, cfg),
    }
}
