//! Speech declipping laboratory.
//!
//! Hard clipping replaces every sample whose magnitude exceeds a threshold
//! with the threshold itself, destroying the waveform peaks. This crate
//! bundles everything needed to study the problem end to end:
//!
//! * [`signal`] - waveform container, clipping, SDR, a threshold solver,
//!   STFT/ISTFT and log-magnitude spectrum images, WAV file I/O
//! * [`sparse`] - iterative hard thresholding declippers over an
//!   overcomplete DCT dictionary, with and without clipping consistency
//! * [`unet`] - a small trainable U-Net (plain Rust, manual gradients)
//!   that maps clipped spectrum images to clean ones
//! * [`metrics`] - SDR, log-likelihood ratio and ESTOI scoring
//! * [`harness`] - dataset preparation, batch runs, result tables, a
//!   noise robustness sweep and spectrogram export
//!
//! The `declip` binary exposes the harness as a small CLI; the crate's
//! `examples/` directory shows each capability in isolation.

pub mod harness;
pub mod metrics;
pub mod signal;
pub mod sparse;
pub mod unet;
