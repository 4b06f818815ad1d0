//! Padded-batch planning for feeding segments to a downstream translation
//! model, plus a simple decode-cost simulator.
//!
//! Batches are built the way sequence models are usually fed: segments
//! sorted by length descending, then packed greedily so that every batch's
//! padded size — batch size × its longest member — stays within a fixed
//! token budget. The cost model is a declared quadratic-in-length proxy for
//! attention-style decoding, useful for *comparing* segmentations of the
//! same audio, not for predicting wall-clock seconds on any real system.

use std::cmp::Reverse;

use crate::error::{Error, Result};
use crate::frame::SegmentList;

/// Default per-batch budget, in frames.
pub const DEFAULT_TOKEN_BUDGET: usize = 100_000;

/// Per-sequence decode cost `alpha·L + beta·L²` where `L` is the sequence's
/// padded length — every member of a batch is padded to the batch's longest,
/// so a batch of `k` sequences padded to `L` costs `k·(alpha·L + beta·L²)`.
/// The quadratic term stands for attention over the padded sequence, which
/// is what makes long segments disproportionately expensive; the defaults
/// weight it so the quadratic part dominates at realistic segment sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            alpha: 1.0,
            beta: 0.005,
        }
    }
}

impl CostModel {
    fn batch_cost(&self, size: usize, padded_len: usize) -> f64 {
        let l = padded_len as f64;
        size as f64 * (self.alpha * l + self.beta * l * l)
    }
}

/// How a segment list packs into padded batches under a token budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchPlan {
    /// Segment indices (into the input list) per batch; every segment
    /// appears in exactly one batch.
    pub batches: Vec<Vec<usize>>,
    /// The budget the plan was built under.
    pub token_budget: usize,
    /// Per batch: batch size × longest member, in frames.
    pub padded_frames: Vec<usize>,
    /// Fraction of all padded frames that are padding rather than audio.
    pub waste_ratio: f64,
}

/// Pack segments into padded batches and price the plan under `cost`.
///
/// Segments are sorted by length descending (ties keep input order), then
/// packed greedily: a batch absorbs the next segment as long as
/// `(size + 1) × longest member ≤ token_budget`. Because of the sort the
/// longest member of a batch is always its first. Returns the plan and the
/// total simulated decode cost: every sequence priced at its batch's padded
/// length.
pub fn simulate_batches(
    segs: &SegmentList,
    token_budget: usize,
    cost: &CostModel,
) -> Result<(BatchPlan, f64)> {
    if segs.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot batch an empty segment list".into(),
        ));
    }
    if token_budget == 0 {
        return Err(Error::InvalidArgument(
            "token budget must be positive".into(),
        ));
    }
    let lengths: Vec<usize> = segs.segments().iter().map(|s| s.frames()).collect();
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| Reverse(lengths[i]));

    let mut batches: Vec<Vec<usize>> = Vec::new();
    let mut padded_frames = Vec::new();
    let mut longest = 0;
    for &i in &order {
        let len = lengths[i];
        if len > token_budget {
            return Err(Error::InvalidArgument(format!(
                "segment {i} [{}, {}) is {len} frames, above the token budget {token_budget}",
                segs.segments()[i].start,
                segs.segments()[i].end
            )));
        }
        let fits = match batches.last() {
            Some(batch) => (batch.len() + 1) * longest <= token_budget,
            None => false,
        };
        if fits {
            let batch = batches.last_mut().expect("checked non-empty");
            batch.push(i);
            *padded_frames.last_mut().expect("one entry per batch") = batch.len() * longest;
        } else {
            longest = len;
            batches.push(vec![i]);
            padded_frames.push(len);
        }
    }

    let padded_total: usize = padded_frames.iter().sum();
    let audio_total: usize = lengths.iter().sum();
    let waste_ratio = (padded_total - audio_total) as f64 / padded_total as f64;
    // padded / size recovers the batch's longest member exactly.
    let total_cost = batches
        .iter()
        .zip(&padded_frames)
        .map(|(batch, &padded)| cost.batch_cost(batch.len(), padded / batch.len()))
        .sum();
    Ok((
        BatchPlan {
            batches,
            token_budget,
            padded_frames,
            waste_ratio,
        },
        total_cost,
    ))
}
