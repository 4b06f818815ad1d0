//! Evaluation: frame-level classification metrics, segment-length
//! statistics and histograms, segmentation-overlap counting, and a
//! resegmentation aligner that re-splits a hypothesis token stream to match
//! reference segments with minimal total word edit distance.

use crate::error::{Error, Result};
use crate::frame::{ProbStream, ReferenceLabels, Segment, SegmentList};

/// Frame-level precision/recall/F1 at a fixed binarization threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePRF {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True when a denominator was zero and the corresponding metric was
    /// reported as 0 rather than left undefined.
    pub zero_division: bool,
}

/// Binarize probabilities at `threshold` (predict 1 when p > threshold) and
/// score them against the labels.
pub fn frame_prf(stream: &ProbStream, labels: &ReferenceLabels, threshold: f64) -> Result<FramePRF> {
    if stream.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "stream has {} frames but labels have {}",
            stream.len(),
            labels.len()
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (&p, &y) in stream.probs().iter().zip(labels.labels()) {
        let pred = f64::from(p) > threshold;
        match (pred, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let mut zero_division = false;
    let mut ratio = |num: u64, denom: u64| {
        if denom == 0 {
            zero_division = true;
            0.0
        } else {
            num as f64 / denom as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(FramePRF {
        precision,
        recall,
        f1,
        zero_division,
    })
}

/// Segment-length statistics in seconds, with a fixed-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthStats {
    pub count: usize,
    /// Arithmetic mean length in seconds; `mean * count` equals the total
    /// covered duration exactly (it is computed from total frames).
    pub mean: f64,
    pub median: f64,
    /// Start of the most populated histogram bin (lowest wins ties).
    pub mode_bin: f64,
    pub bin_width: f64,
    /// Bin `k` counts segments with length in `[k*bin_width, (k+1)*bin_width)`.
    pub histogram: Vec<usize>,
}

impl LengthStats {
    /// Histogram as CSV rows `bin_start,count`, with a header.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_start,count\n");
        for (k, &c) in self.histogram.iter().enumerate() {
            out.push_str(&format!("{:.3},{}\n", k as f64 * self.bin_width, c));
        }
        out
    }
}

pub fn length_stats(segs: &SegmentList, bin_width: f64) -> Result<LengthStats> {
    if !(bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin_width must be positive, got {bin_width}"
        )));
    }
    let spec = segs.spec();
    let mut lengths: Vec<f64> = segs
        .segments()
        .iter()
        .map(|s| s.duration_seconds(spec))
        .collect();
    lengths.sort_by(|a, b| a.partial_cmp(b).expect("durations are finite"));
    let count = lengths.len();
    if count == 0 {
        return Ok(LengthStats {
            count: 0,
            mean: 0.0,
            median: 0.0,
            mode_bin: 0.0,
            bin_width,
            histogram: Vec::new(),
        });
    }
    let mean = spec.frames_to_seconds(segs.covered_frames()) / count as f64;
    let median = if count % 2 == 1 {
        lengths[count / 2]
    } else {
        0.5 * (lengths[count / 2 - 1] + lengths[count / 2])
    };
    let mut histogram: Vec<usize> = Vec::new();
    for &len in &lengths {
        let bin = (len / bin_width).floor() as usize;
        if bin >= histogram.len() {
            histogram.resize(bin + 1, 0);
        }
        histogram[bin] += 1;
    }
    let mode_idx = histogram
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map_or(0, |(k, _)| k);
    Ok(LengthStats {
        count,
        mean,
        median,
        mode_bin: mode_idx as f64 * bin_width,
        bin_width,
        histogram,
    })
}

/// How two segmentations of one recording relate, frame-wise and
/// structurally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    /// Intersection over union of the covered frame sets; 1.0 when both
    /// are empty.
    pub iou: f64,
    /// Reference segments overlapped by two or more hypothesis segments.
    pub over_segmented: usize,
    /// Hypothesis segments overlapping two or more reference segments.
    pub under_segmented: usize,
}

pub fn overlap_metrics(hyp: &SegmentList, reference: &SegmentList) -> Result<OverlapReport> {
    if hyp.spec() != reference.spec() {
        return Err(Error::SpecMismatch(format!(
            "hypothesis spec {:?} differs from reference spec {:?}",
            hyp.spec(),
            reference.spec()
        )));
    }
    let (a, b) = (hyp.segments(), reference.segments());
    let mut inter = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let s = a[i].start.max(b[j].start);
        let e = a[i].end.min(b[j].end);
        if s < e {
            inter += e - s;
        }
        if a[i].end <= b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    let union = hyp.covered_frames() + reference.covered_frames() - inter;
    let iou = if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    };
    Ok(OverlapReport {
        iou,
        over_segmented: count_multi_overlaps(b, a),
        under_segmented: count_multi_overlaps(a, b),
    })
}

/// Number of segments in `of` that overlap at least two segments in `by`.
fn count_multi_overlaps(of: &[Segment], by: &[Segment]) -> usize {
    let mut j = 0;
    let mut count = 0;
    for seg in of {
        while j < by.len() && by[j].end <= seg.start {
            j += 1;
        }
        let overlapping = by[j..].iter().take_while(|b| b.start < seg.end).count();
        if overlapping >= 2 {
            count += 1;
        }
    }
    count
}

/// Half-open span of hypothesis token indices assigned to one reference
/// segment.
pub type TokenSpan = (usize, usize);

/// Outcome of [`resegment_align`]: one hypothesis span per reference
/// segment, spans contiguous and exhaustive over the hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentResult {
    pub spans: Vec<TokenSpan>,
    pub per_segment_distance: Vec<usize>,
    pub total_distance: usize,
}

/// Split `hyp` into `refs.len()` contiguous spans minimizing the summed
/// word-level Levenshtein distance between each span and its reference
/// segment. Ties resolve to the lexicographically smallest boundary vector
/// (every boundary as early as possible). Token comparison is exact and
/// case-sensitive.
pub fn resegment_align(hyp: &[String], refs: &[Vec<String>]) -> Result<AlignmentResult> {
    let n = hyp.len();
    let k_segs = refs.len();
    if k_segs == 0 {
        if n == 0 {
            return Ok(AlignmentResult {
                spans: Vec::new(),
                per_segment_distance: Vec::new(),
                total_distance: 0,
            });
        }
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} hypothesis tokens across zero reference segments"
        )));
    }

    // suffix[k][j] = minimal cost of consuming hyp[j..] with refs[k..].
    // Built back to front; row k comes from row k+1 by one pass of the edit
    // recurrence over refs[k], giving O(total ref tokens × hyp tokens).
    let mut suffix: Vec<Vec<u32>> = vec![Vec::new(); k_segs + 1];
    suffix[k_segs] = (0..=n).map(|j| (n - j) as u32).collect();
    // The final span must end exactly at the hypothesis end, so leftover
    // hypothesis tokens after the last segment are charged as edits — which
    // the (n - j) base row does, matching "append leftovers to the last
    // span" semantics.
    for k in (0..k_segs).rev() {
        let r = &refs[k];
        let m = r.len();
        // rows[p][j] = cost of matching r[p..] against some prefix of
        // hyp[j..], plus the suffix cost after it; computed bottom-up.
        let mut below: Vec<u32> = suffix[k + 1].clone(); // p = m
        for j in (0..n).rev() {
            below[j] = below[j].min(below[j + 1] + 1);
        }
        for p in (0..m).rev() {
            let mut row = vec![0u32; n + 1];
            row[n] = below[n] + 1;
            for j in (0..n).rev() {
                let sub = below[j + 1] + u32::from(r[p] != hyp[j]);
                row[j] = sub.min(below[j] + 1).min(row[j + 1] + 1);
            }
            below = row;
        }
        suffix[k] = below;
    }
    let total_distance = suffix[0][0] as usize;

    // Greedy reconstruction: take each boundary as early as it can be while
    // preserving the optimal total — the lexicographically smallest
    // boundary vector among minimizers.
    let mut spans = Vec::with_capacity(k_segs);
    let mut per_segment_distance = Vec::with_capacity(k_segs);
    let mut start = 0usize;
    for k in 0..k_segs {
        let costs = prefix_edit_costs(&refs[k], &hyp[start..]);
        let must = suffix[k][start];
        let mut chosen = None;
        for (len, &c) in costs.iter().enumerate() {
            let end = start + len;
            // Everything must land in the last span.
            if k + 1 == k_segs && end != n {
                continue;
            }
            if c + suffix[k + 1][end] == must {
                chosen = Some((end, c as usize));
                break;
            }
        }
        let (end, cost) =
            chosen.expect("suffix table guarantees an optimal boundary exists");
        spans.push((start, end));
        per_segment_distance.push(cost);
        start = end;
    }

    Ok(AlignmentResult {
        spans,
        per_segment_distance,
        total_distance,
    })
}

/// Levenshtein distance from `r` to every prefix of `hyp`:
/// `result[len] = lev(r, hyp[..len])`.
fn prefix_edit_costs(r: &[String], hyp: &[String]) -> Vec<u32> {
    let n = hyp.len();
    let mut prev: Vec<u32> = (0..=n as u32).collect(); // zero ref tokens
    for rp in r {
        let mut row = vec![0u32; n + 1];
        row[0] = prev[0] + 1;
        for j in 1..=n {
            let sub = prev[j - 1] + u32::from(*rp != hyp[j - 1]);
            row[j] = sub.min(prev[j] + 1).min(row[j - 1] + 1);
        }
        prev = row;
    }
    prev
}

/// Bundle of evaluation outputs with stable, diff-friendly text form.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub prf: Option<FramePRF>,
    pub overlap: Option<OverlapReport>,
    pub hyp_stats: LengthStats,
    pub ref_stats: Option<LengthStats>,
}

impl EvalReport {
    /// Key=value lines in a fixed order; byte-identical for equal inputs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(prf) = &self.prf {
            out.push_str(&format!("frame_precision={:.6}\n", prf.precision));
            out.push_str(&format!("frame_recall={:.6}\n", prf.recall));
            out.push_str(&format!("frame_f1={:.6}\n", prf.f1));
            out.push_str(&format!("frame_zero_division={}\n", prf.zero_division));
        }
        if let Some(ov) = &self.overlap {
            out.push_str(&format!("overlap_iou={:.6}\n", ov.iou));
            out.push_str(&format!("over_segmented={}\n", ov.over_segmented));
            out.push_str(&format!("under_segmented={}\n", ov.under_segmented));
        }
        let stats = |out: &mut String, prefix: &str, s: &LengthStats| {
            out.push_str(&format!("{prefix}_count={}\n", s.count));
            out.push_str(&format!("{prefix}_mean_s={:.3}\n", s.mean));
            out.push_str(&format!("{prefix}_median_s={:.3}\n", s.median));
            out.push_str(&format!("{prefix}_mode_bin_s={:.3}\n", s.mode_bin));
        };
        stats(&mut out, "hyp", &self.hyp_stats);
        if let Some(r) = &self.ref_stats {
            stats(&mut out, "ref", r);
        }
        out
    }
}
