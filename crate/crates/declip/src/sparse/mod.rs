//! Sparse declipping: iterative hard thresholding (IHT) over an
//! overcomplete DCT dictionary, in a plain variant and a
//! clipping-consistent variant.
//!
//! A clipped signal is split into reliable samples (still equal to the
//! original) and saturated samples whose true value is only known to lie
//! beyond the threshold. Each analysis frame is approximated by a sparse
//! combination of dictionary atoms that fits the reliable samples; the
//! consistent variant additionally pushes saturated samples to the
//! correct side of the threshold.

mod dict;
mod solver;

pub use dict::Dictionary;
pub use solver::{
    declip_frame, declip_signal, DeclipResult, FrameSolution, SolverVariant, SparseSolverConfig,
};

/// Relative slack when deciding whether a sample sits at the clipping
/// threshold, absorbing rounding from storage and arithmetic.
pub const CLIP_DETECT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleLabel {
    Reliable,
    ClippedPositive,
    ClippedNegative,
}

/// Per-sample classification of a clipped signal at a known threshold.
#[derive(Debug, Clone)]
pub struct ClipMask {
    pub labels: Vec<SampleLabel>,
    pub threshold: f64,
}

impl ClipMask {
    /// Labels every sample: at or beyond `threshold * (1 - CLIP_DETECT_TOL)`
    /// in magnitude counts as clipped, with the sign deciding the side.
    ///
    /// # Panics
    /// Panics if `threshold` is not positive and finite.
    pub fn from_samples(samples: &[f64], threshold: f64) -> Self {
        assert!(
            threshold > 0.0 && threshold.is_finite(),
            "clip threshold must be positive and finite"
        );
        let edge = threshold * (1.0 - CLIP_DETECT_TOL);
        let labels = samples
            .iter()
            .map(|&s| {
                if s >= edge {
                    SampleLabel::ClippedPositive
                } else if s <= -edge {
                    SampleLabel::ClippedNegative
                } else {
                    SampleLabel::Reliable
                }
            })
            .collect();
        ClipMask { labels, threshold }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn reliable_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|&&l| l == SampleLabel::Reliable)
            .count()
    }

    pub fn clipped_count(&self) -> usize {
        self.len() - self.reliable_count()
    }
}

/// Projects an estimate onto the set of signals consistent with the
/// clipped observation: reliable samples are restored exactly and
/// saturated samples are clamped to the correct side of the threshold.
///
/// The projection is idempotent and never moves a sample further than
/// needed, so points already consistent pass through unchanged.
pub fn consistency_project(estimate: &mut [f64], observed: &[f64], mask: &ClipMask) {
    assert_eq!(estimate.len(), observed.len());
    assert_eq!(estimate.len(), mask.len());
    let t = mask.threshold;
    for i in 0..estimate.len() {
        match mask.labels[i] {
            SampleLabel::Reliable => estimate[i] = observed[i],
            SampleLabel::ClippedPositive => estimate[i] = estimate[i].max(t),
            SampleLabel::ClippedNegative => estimate[i] = estimate[i].min(-t),
        }
    }
}
