//! Time-domain signal handling: the waveform container, hard clipping,
//! signal-to-distortion ratio, a clipping-threshold solver and additive
//! Gaussian noise.
//!
//! The clipping model is the usual hard saturation
//!
//! ```text
//! y(t) = x(t)          if |x(t)| <= threshold
//!        +- threshold  otherwise (sign of x(t))
//! ```
//!
//! and clipping severity is expressed as the SDR between the clean signal
//! and its clipped version, so "clip this utterance to 3.5 dB" is solved
//! for the matching threshold by [`threshold_for_sdr`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

pub mod image;
pub mod stft;
pub mod wav;

pub use image::{extract_images, reconstruct, LogMagImage, MAG_FLOOR};
pub use stft::{hann_window, istft, stft, ComplexSpectrogram, StftConfig};
pub use wav::{read_wav, write_wav, I16_SCALE};

/// SDR reported when the estimate equals the reference exactly (the true
/// value is +infinity); finite results are capped here as well.
pub const SDR_CAP_DB: f64 = 300.0;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("signal lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("reference signal has zero energy")]
    ZeroReference,
    #[error("target SDR {target:.2} dB unattainable; clipping to near zero still yields {limit:.2} dB")]
    UnattainableSdr { target: f64, limit: f64 },
    #[error("threshold search did not converge (best error {0:.3} dB)")]
    NoConvergence(f64),
    #[error("noise variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("invalid STFT configuration: {0}")]
    BadStftConfig(String),
    #[error("overlap-add normalization is degenerate (a sample has zero window weight)")]
    DegenerateOverlap,
    #[error("spectrogram frame count mismatch: images cover {0} frames, spectrogram has {1}")]
    FrameCountMismatch(usize, usize),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed WAV file: {0}")]
    MalformedWav(String),
    #[error("malformed image file: {0}")]
    MalformedImage(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedWav(String),
}

/// A mono audio signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    /// Wraps samples at a given rate.
    ///
    /// # Panics
    /// Panics if `sample_rate` is zero.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        Waveform {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Largest absolute sample value (0 for an empty signal).
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &s| m.max(s.abs()))
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|&s| s * s).sum()
    }
}

/// Hard-clips a signal at the given positive threshold.
///
/// Samples within `[-threshold, threshold]` pass through unchanged, the
/// rest saturate at `threshold` with the original sign. Clipping an
/// already clipped signal at the same threshold is the identity.
///
/// # Panics
/// Panics if `threshold` is not a positive finite number.
pub fn clip(x: &Waveform, threshold: f64) -> Waveform {
    assert!(
        threshold > 0.0 && threshold.is_finite(),
        "clip threshold must be positive and finite"
    );
    let samples = x
        .samples
        .iter()
        .map(|&s| {
            if s > threshold {
                threshold
            } else if s < -threshold {
                -threshold
            } else {
                s
            }
        })
        .collect();
    Waveform::new(samples, x.sample_rate)
}

/// Signal-to-distortion ratio `10 log10(||x||^2 / ||x - y||^2)` in dB.
///
/// # Arguments
/// * `reference` - the clean signal `x`
/// * `estimate` - the degraded or processed signal `y`
///
/// # Returns
/// The SDR in dB, capped at [`SDR_CAP_DB`] (reached when `y` equals `x`).
///
/// # Errors
/// Fails when the lengths differ or the reference has zero energy.
pub fn sdr_db(reference: &Waveform, estimate: &Waveform) -> Result<f64, SignalError> {
    if reference.len() != estimate.len() {
        return Err(SignalError::LengthMismatch(reference.len(), estimate.len()));
    }
    let signal = reference.energy();
    if signal <= 0.0 {
        return Err(SignalError::ZeroReference);
    }
    let distortion: f64 = reference
        .samples
        .iter()
        .zip(&estimate.samples)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    if distortion <= 0.0 {
        return Ok(SDR_CAP_DB);
    }
    Ok((10.0 * (signal / distortion).log10()).min(SDR_CAP_DB))
}

/// Finds the clipping threshold that degrades `x` to a target SDR.
///
/// The SDR of `clip(x, t)` against `x` increases strictly with `t`, so the
/// threshold is located by bisection over `(0, peak]`. The returned
/// threshold reproduces the target within 0.05 dB (the search itself stops
/// at 0.01 dB to leave headroom for later quantization).
///
/// # Errors
/// Fails for a zero-energy signal, a non-finite target, or a target below
/// what clipping can reach (the SDR limit as the threshold approaches 0).
pub fn threshold_for_sdr(x: &Waveform, target_db: f64) -> Result<f64, SignalError> {
    if !target_db.is_finite() {
        return Err(SignalError::NoConvergence(f64::INFINITY));
    }
    if x.energy() <= 0.0 {
        return Err(SignalError::ZeroReference);
    }
    let peak = x.peak();
    let sdr_at = |t: f64| sdr_db(x, &clip(x, t)).expect("same length, nonzero reference");

    let mut lo = peak * 1e-9;
    let limit = sdr_at(lo);
    if target_db < limit {
        return Err(SignalError::UnattainableSdr {
            target: target_db,
            limit,
        });
    }
    let mut hi = peak;
    let mut best = (lo, (limit - target_db).abs());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let err = sdr_at(mid) - target_db;
        if err.abs() < best.1 {
            best = (mid, err.abs());
        }
        if err.abs() <= 0.01 {
            return Ok(mid);
        }
        if err > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if best.1 <= 0.05 {
        Ok(best.0)
    } else {
        Err(SignalError::NoConvergence(best.1))
    }
}

/// Adds zero-mean Gaussian noise of the given variance, reproducibly.
///
/// A variance of exactly zero returns the input unchanged, bit for bit,
/// without touching the RNG.
pub fn add_gaussian_noise(x: &Waveform, variance: f64, seed: u64) -> Result<Waveform, SignalError> {
    if !(variance >= 0.0) {
        return Err(SignalError::NegativeVariance(variance));
    }
    if variance == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, variance.sqrt()).expect("finite std");
    let samples = x
        .samples
        .iter()
        .map(|&s| s + normal.sample(&mut rng))
        .collect();
    Ok(Waveform::new(samples, x.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amplitude: f64, seconds: f64, rate: u32) -> Waveform {
        let n = (seconds * rate as f64).round() as usize;
        let samples = (0..n)
            .map(|t| amplitude * (2.0 * std::f64::consts::PI * freq * t as f64 / rate as f64).sin())
            .collect();
        Waveform::new(samples, rate)
    }

    #[test]
    fn clip_leaves_small_samples_and_saturates_large_ones() {
        let x = Waveform::new(vec![0.5, -0.2, 0.9, -0.95, 0.6], 16000);
        let y = clip(&x, 0.6);
        assert_eq!(y.samples, vec![0.5, -0.2, 0.6, -0.6, 0.6]);
    }

    #[test]
    fn clip_is_idempotent() {
        let x = sine(440.0, 1.0, 0.05, 16000);
        let once = clip(&x, 0.3);
        let twice = clip(&once, 0.3);
        assert_eq!(once.samples, twice.samples);
    }

    #[test]
    fn sdr_matches_hand_computation() {
        let x = Waveform::new(vec![1.0, 1.0, 1.0, 1.0], 8000);
        let y = Waveform::new(vec![1.0, 1.0, 1.0, 0.5], 8000);
        let got = sdr_db(&x, &y).unwrap();
        assert!((got - 10.0 * 16.0f64.log10()).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn sdr_of_identical_signals_is_capped() {
        let x = sine(100.0, 0.5, 0.01, 16000);
        assert_eq!(sdr_db(&x, &x).unwrap(), SDR_CAP_DB);
    }

    #[test]
    fn sdr_rejects_mismatched_lengths_and_zero_reference() {
        let x = Waveform::new(vec![1.0, 2.0], 8000);
        let y = Waveform::new(vec![1.0], 8000);
        assert!(matches!(
            sdr_db(&x, &y),
            Err(SignalError::LengthMismatch(2, 1))
        ));
        let z = Waveform::new(vec![0.0, 0.0], 8000);
        assert!(matches!(sdr_db(&z, &z), Err(SignalError::ZeroReference)));
    }

    #[test]
    fn threshold_solver_hits_requested_sdr() {
        let x = sine(220.0, 0.8, 0.25, 16000);
        for target in [0.5, 3.5, 7.5, 12.5, 20.0] {
            let t = threshold_for_sdr(&x, target).unwrap();
            let realized = sdr_db(&x, &clip(&x, t)).unwrap();
            assert!(
                (realized - target).abs() <= 0.05,
                "target {target} realized {realized}"
            );
        }
    }

    #[test]
    fn threshold_for_gentle_clipping_sits_near_the_peak() {
        let x = sine(220.0, 0.7, 0.5, 16000);
        let t = threshold_for_sdr(&x, 60.0).unwrap();
        assert!(t > 0.99 * 0.7 && t <= 0.7, "threshold {t}");
    }

    #[test]
    fn unattainable_target_is_reported() {
        let x = sine(220.0, 0.8, 0.1, 16000);
        assert!(matches!(
            threshold_for_sdr(&x, -5.0),
            Err(SignalError::UnattainableSdr { .. })
        ));
    }

    #[test]
    fn zero_variance_noise_is_the_identity() {
        let x = sine(330.0, 0.4, 0.02, 16000);
        let y = add_gaussian_noise(&x, 0.0, 7).unwrap();
        assert_eq!(x.samples, y.samples);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let x = sine(330.0, 0.4, 0.02, 16000);
        let a = add_gaussian_noise(&x, 0.01, 42).unwrap();
        let b = add_gaussian_noise(&x, 0.01, 42).unwrap();
        let c = add_gaussian_noise(&x, 0.01, 43).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn noise_variance_matches_request() {
        let x = Waveform::new(vec![0.0; 1_000_000], 16000);
        let y = add_gaussian_noise(&x, 0.004, 1234).unwrap();
        let measured = y.samples.iter().map(|&s| s * s).sum::<f64>() / y.len() as f64;
        assert!(
            (measured - 0.004).abs() / 0.004 < 0.02,
            "measured variance {measured}"
        );
    }

    #[test]
    fn negative_variance_is_rejected() {
        let x = sine(100.0, 0.1, 0.01, 16000);
        assert!(matches!(
            add_gaussian_noise(&x, -1.0, 0),
            Err(SignalError::NegativeVariance(_))
        ));
    }
}
