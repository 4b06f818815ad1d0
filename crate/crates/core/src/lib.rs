//! Speech-stream segmentation toolkit.
//!
//! Turns per-frame "inside-a-segment" probability streams into speech
//! segments. Ships four segmentation algorithms, a synthetic corpus
//! generator with calibrated frame-level precision/recall, evaluation
//! metrics (frame P/R/F1, length statistics, overlap, WER-minimizing
//! resegmentation), WAV slicing, and a batching-cost simulator.

pub mod audio;
pub mod batch;
pub mod error;
pub mod eval;
pub mod frame;
mod io_util;
pub mod segmenters;
pub mod smoothing;
pub mod synth;

pub use audio::{
    read_manifest, read_wav, slice_wav, write_manifest, write_wav, Manifest, ManifestRow,
};
pub use batch::{simulate_batches, BatchPlan, CostModel, DEFAULT_TOKEN_BUDGET};
pub use error::{Error, Result};
pub use eval::{
    frame_prf, length_stats, overlap_metrics, resegment_align, AlignmentResult, EvalReport,
    FramePRF, LengthStats, OverlapReport, TokenSpan,
};
pub use frame::{
    concat_windows, labels_to_segments, read_labels, read_probs, read_segments,
    seconds_to_frames, segments_to_labels, write_labels, write_probs, write_segments, AudioSpec,
    ProbStream, ReferenceLabels, Segment, SegmentList,
};
pub use io_util::write_text;
pub use segmenters::{
    build_threshold_filter, pdac, pstrm, pthr, pthr_ma, segment, trim, Algorithm,
    SegmenterConfig, ThresholdFilter,
};
pub use smoothing::{moving_average, SmoothingConfig};
pub use synth::{corrupt_to_probs, derive_seed, gen_reference, CorpusProfile, NoiseProfile};
