//! Probability smoothing applied before threshold-style segmentation.
//!
//! Frame classifiers emit noisy per-frame probabilities; a single low frame
//! inside otherwise-confident speech splits a threshold scan. A short
//! trailing moving average fills those dips without moving segment bounds by
//! more than the window length.

use crate::error::{Error, Result};
use crate::frame::ProbStream;

/// Moving-average window, in frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingConfig {
    /// Window length; 0 and 1 both mean "no smoothing".
    pub n_ma: usize,
}

impl SmoothingConfig {
    pub fn new(n_ma: usize) -> SmoothingConfig {
        SmoothingConfig { n_ma }
    }

    pub fn is_identity(&self) -> bool {
        self.n_ma <= 1
    }
}

/// Trailing simple moving average.
///
/// Output frame `i` averages the window ending at `i`, at most `n_ma` frames
/// long: frames `i - n_ma + 1 ..= i`, truncated at the start of the stream
/// and divided by the number of frames actually present. Averaging only over
/// present frames keeps the warm-up region in `[0, 1]` and leaves a constant
/// stream unchanged. The output has the same length as the input and the
/// result at frame `i` never depends on frames after `i`, so the same values
/// come out of streaming and batch runs.
pub fn moving_average(stream: &ProbStream, config: SmoothingConfig) -> Result<ProbStream> {
    if config.is_identity() {
        return Ok(stream.clone());
    }
    let probs = stream.probs();
    let n_ma = config.n_ma;
    let mut out = Vec::with_capacity(probs.len());
    // Running sum over the trailing window, accumulated in f64 so that
    // long windows don't lose mass to f32 rounding.
    let mut sum = 0.0_f64;
    for i in 0..probs.len() {
        sum += f64::from(probs[i]);
        if i >= n_ma {
            sum -= f64::from(probs[i - n_ma]);
        }
        let terms = (i + 1).min(n_ma);
        let value = (sum / terms as f64) as f32;
        // Guard against accumulated rounding pushing a frame out of range.
        out.push(value.clamp(0.0, 1.0));
    }
    if out.len() != probs.len() {
        return Err(Error::InvalidArgument(
            "smoothing changed stream length".into(),
        ));
    }
    Ok(ProbStream::from_validated(
        out,
        *stream.spec(),
        stream.recording_id(),
    ))
}
