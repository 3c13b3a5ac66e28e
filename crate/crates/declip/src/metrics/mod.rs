//! Objective quality measures for declipping results.
//!
//! Three numbers per utterance: signal to distortion ratio (waveform
//! accuracy, higher is better), log likelihood ratio (spectral envelope
//! distance, lower is better), and a short-time intelligibility score in
//! roughly `[0, 1]` (higher is better).

pub mod estoi;
pub mod lpc;

pub use estoi::{estoi, resample, third_octave_bands};
pub use lpc::{autocorrelation, levinson, llr, lpc};

use thiserror::Error;

use crate::signal::{sdr_db, SignalError, Waveform};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(u32, u32),
    #[error("length mismatch: {0} samples vs {1}")]
    LengthMismatch(usize, usize),
    #[error("signal too short: have {0}, need at least {1}")]
    TooShort(usize, usize),
    #[error("no usable frames after silence removal")]
    NoUsableFrames,
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// All three measures for one clean/degraded pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub sdr_db: f64,
    pub llr: f64,
    pub estoi: f64,
}

/// Scores a degraded signal against its clean reference. Both waveforms
/// must share sample rate and length.
pub fn evaluate(clean: &Waveform, degraded: &Waveform) -> Result<MetricReport, MetricsError> {
    Ok(MetricReport {
        sdr_db: sdr_db(clean, degraded)?,
        llr: llr(clean, degraded)?,
        estoi: estoi(clean, degraded)?,
    })
}
