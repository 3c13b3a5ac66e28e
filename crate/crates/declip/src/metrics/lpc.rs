//! Linear prediction analysis and the log likelihood ratio distance.
//!
//! The LLR compares the all-pole spectral envelopes of a degraded signal
//! and its clean reference frame by frame. Lower is better; identical
//! signals score exactly zero.

use crate::signal::{hann_window, Waveform};

use super::MetricsError;

/// Frame distances above this are clamped before averaging.
const LLR_FRAME_CAP: f64 = 2.0;
/// Fraction of best frames kept when averaging (the worst tail is
/// discarded as outliers).
const LLR_KEEP_FRACTION: f64 = 0.95;

/// Biased autocorrelation `r[k] = sum_t x[t] x[t+k]` for lags `0..=max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let mut r = vec![0.0; max_lag + 1];
    for (k, rk) in r.iter_mut().enumerate() {
        let mut acc = 0.0;
        for t in 0..x.len().saturating_sub(k) {
            acc += x[t] * x[t + k];
        }
        *rk = acc;
    }
    r
}

/// Levinson-Durbin recursion. Returns the prediction polynomial
/// `a = [1, a1, .., ap]` such that the residual `sum_j a_j x[t-j]` has
/// minimal energy, or `None` when the frame is silent or the recursion
/// breaks down numerically.
pub fn levinson(r: &[f64], order: usize) -> Option<Vec<f64>> {
    assert!(r.len() > order);
    if r[0] <= 0.0 || !r[0].is_finite() {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for i in 1..=order {
        let mut acc = r[i];
        for j in 1..i {
            acc += a[j] * r[i - j];
        }
        let k = -acc / err;
        if !k.is_finite() {
            return None;
        }
        let half = i / 2;
        for j in 1..=half {
            let tmp = a[j] + k * a[i - j];
            a[i - j] += k * a[j];
            a[j] = tmp;
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= 0.0 || !err.is_finite() {
            return None;
        }
    }
    Some(a)
}

/// Fits LPC coefficients of the given order to one frame.
pub fn lpc(frame: &[f64], order: usize) -> Option<Vec<f64>> {
    levinson(&autocorrelation(frame, order), order)
}

/// Quadratic form `a R a^T` where `R` is the Toeplitz autocorrelation
/// matrix built from the lags in `r`.
fn toeplitz_quadratic(a: &[f64], r: &[f64]) -> f64 {
    let p = a.len() - 1;
    let mut acc = r[0] * a.iter().map(|v| v * v).sum::<f64>();
    for k in 1..=p {
        let mut cross = 0.0;
        for j in 0..=p - k {
            cross += a[j] * a[j + k];
        }
        acc += 2.0 * r[k] * cross;
    }
    acc
}

/// Mean log likelihood ratio between a clean reference and a degraded
/// signal. Both must share sample rate and length. Silent frames are
/// skipped; the worst 5% of frame distances are discarded and each
/// frame distance is clamped to `[0, 2]`.
pub fn llr(clean: &Waveform, degraded: &Waveform) -> Result<f64, MetricsError> {
    if clean.sample_rate != degraded.sample_rate {
        return Err(MetricsError::RateMismatch(
            clean.sample_rate,
            degraded.sample_rate,
        ));
    }
    if clean.len() != degraded.len() {
        return Err(MetricsError::LengthMismatch(clean.len(), degraded.len()));
    }
    let rate = clean.sample_rate as f64;
    let frame_len = (0.032 * rate).round() as usize;
    let shift = (0.008 * rate).round() as usize;
    let order = ((rate / 1000.0).round() as usize).max(2);
    if clean.len() < frame_len {
        return Err(MetricsError::TooShort(clean.len(), frame_len));
    }

    let window = hann_window(frame_len);
    let mut distances = Vec::new();
    let mut start = 0;
    let mut buf_c = vec![0.0; frame_len];
    let mut buf_d = vec![0.0; frame_len];
    while start + frame_len <= clean.len() {
        for t in 0..frame_len {
            buf_c[t] = clean.samples[start + t] * window[t];
            buf_d[t] = degraded.samples[start + t] * window[t];
        }
        start += shift;
        let r_clean = autocorrelation(&buf_c, order);
        let (a_clean, a_deg) = match (levinson(&r_clean, order), lpc(&buf_d, order)) {
            (Some(c), Some(d)) => (c, d),
            _ => continue,
        };
        let den = toeplitz_quadratic(&a_clean, &r_clean);
        let num = toeplitz_quadratic(&a_deg, &r_clean);
        if den <= 0.0 || num <= 0.0 {
            continue;
        }
        distances.push((num / den).ln().clamp(0.0, LLR_FRAME_CAP));
    }
    if distances.is_empty() {
        return Err(MetricsError::NoUsableFrames);
    }
    distances.sort_by(|a, b| a.total_cmp(b));
    let keep = ((distances.len() as f64 * LLR_KEEP_FRACTION).ceil() as usize)
        .clamp(1, distances.len());
    Ok(distances[..keep].iter().sum::<f64>() / keep as f64)
}
