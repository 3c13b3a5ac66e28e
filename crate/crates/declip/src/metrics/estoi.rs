//! Intelligibility estimation from short-time one-third octave band
//! envelopes.
//!
//! Both signals are resampled to 10 kHz, silent stretches (judged on the
//! clean reference) are removed, and band envelopes from 256-sample
//! frames are compared over sliding 30-frame segments after row and
//! column normalization. The score is near 1 for transparent processing
//! and near 0 for unrelated signals.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::signal::{hann_window, Waveform};

use super::MetricsError;

const TARGET_RATE: u32 = 10_000;
const FRAME: usize = 256;
const SHIFT: usize = 128;
const FFT_SIZE: usize = 512;
const NUM_BANDS: usize = 15;
const FIRST_CENTER_HZ: f64 = 150.0;
const SEGMENT_FRAMES: usize = 30;
const SILENCE_RANGE_DB: f64 = 40.0;
/// Zero crossings per side of the windowed sinc resampling kernel.
const SINC_CROSSINGS: usize = 12;

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Rational-ratio resampling with a Hann-windowed sinc kernel. The
/// kernel is zero phase, so the output is time aligned with the input.
pub fn resample(x: &Waveform, target_rate: u32) -> Waveform {
    if x.sample_rate == target_rate {
        return x.clone();
    }
    let g = gcd(x.sample_rate as usize, target_rate as usize);
    let up = target_rate as usize / g;
    let down = x.sample_rate as usize / g;
    let lmax = up.max(down);
    let half = (SINC_CROSSINGS * lmax) as isize;
    let cutoff = 0.5 / lmax as f64;

    let mut kernel = vec![0.0; 2 * half as usize + 1];
    for i in -half..=half {
        let t = i as f64;
        let sinc = if i == 0 {
            2.0 * cutoff
        } else {
            (std::f64::consts::TAU * cutoff * t).sin() / (std::f64::consts::PI * t)
        };
        let taper = 0.5 * (1.0 + (std::f64::consts::PI * t / (half + 1) as f64).cos());
        kernel[(i + half) as usize] = up as f64 * sinc * taper;
    }

    let out_len = (x.len() * up).div_ceil(down);
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let center = (j * down) as isize;
        let n_lo = ((center - half) as f64 / up as f64).ceil() as isize;
        let n_lo = n_lo.max(0);
        let n_hi = ((center + half) / up as isize).min(x.len() as isize - 1);
        let mut acc = 0.0;
        for n in n_lo..=n_hi {
            acc += x.samples[n as usize] * kernel[(center - n * up as isize + half) as usize];
        }
        out.push(acc);
    }
    Waveform::new(out, target_rate)
}

/// Drops frames whose clean-reference energy sits more than 40 dB below
/// the loudest frame, applying the same selection to both signals. The
/// kept frames are overlap-added back into shorter signals.
fn remove_silent_frames(
    clean: &[f64],
    degraded: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
    if clean.len() < FRAME {
        return Err(MetricsError::TooShort(clean.len(), FRAME));
    }
    let window = hann_window(FRAME);
    let num_frames = (clean.len() - FRAME) / SHIFT + 1;
    let energies: Vec<f64> = (0..num_frames)
        .map(|m| {
            (0..FRAME)
                .map(|t| {
                    let v = window[t] * clean[m * SHIFT + t];
                    v * v
                })
                .sum()
        })
        .collect();
    let max_energy = energies.iter().cloned().fold(0.0, f64::max);
    if max_energy <= 0.0 {
        return Err(MetricsError::NoUsableFrames);
    }
    let threshold = max_energy * 10f64.powf(-SILENCE_RANGE_DB / 10.0);
    let kept: Vec<usize> = (0..num_frames)
        .filter(|&m| energies[m] > threshold)
        .collect();
    let out_len = (kept.len() - 1) * SHIFT + FRAME;
    let mut out_c = vec![0.0; out_len];
    let mut out_d = vec![0.0; out_len];
    for (slot, &m) in kept.iter().enumerate() {
        let base = slot * SHIFT;
        for t in 0..FRAME {
            out_c[base + t] += window[t] * clean[m * SHIFT + t];
            out_d[base + t] += window[t] * degraded[m * SHIFT + t];
        }
    }
    Ok((out_c, out_d))
}

/// Bin ranges `[lo, hi)` of the 15 one-third octave bands on a 512-point
/// spectrum at 10 kHz, starting at 150 Hz.
pub fn third_octave_bands() -> Vec<(usize, usize)> {
    let bin_hz = TARGET_RATE as f64 / FFT_SIZE as f64;
    (0..NUM_BANDS)
        .map(|k| {
            let cf = FIRST_CENTER_HZ * 2f64.powf(k as f64 / 3.0);
            let f1 = cf / 2f64.powf(1.0 / 6.0);
            let f2 = cf * 2f64.powf(1.0 / 6.0);
            let lo = (f1 / bin_hz).ceil() as usize;
            let hi = (f2 / bin_hz).ceil() as usize;
            (lo, hi)
        })
        .collect()
}

/// Band envelope matrix: `bands[k][m]` is the root energy of band `k`
/// in frame `m`.
fn band_envelopes(x: &[f64]) -> Vec<Vec<f64>> {
    let window = hann_window(FRAME);
    let num_frames = (x.len() - FRAME) / SHIFT + 1;
    let bands = third_octave_bands();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(FFT_SIZE);
    let mut envelopes = vec![vec![0.0; num_frames]; NUM_BANDS];
    let mut buf = vec![Complex64::default(); FFT_SIZE];
    for m in 0..num_frames {
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = if t < FRAME {
                Complex64::new(window[t] * x[m * SHIFT + t], 0.0)
            } else {
                Complex64::default()
            };
        }
        fft.process(&mut buf);
        for (k, &(lo, hi)) in bands.iter().enumerate() {
            let energy: f64 = buf[lo..hi].iter().map(|c| c.norm_sqr()).sum();
            envelopes[k][m] = energy.sqrt();
        }
    }
    envelopes
}

/// Subtracts the mean and scales to unit norm; all-constant vectors
/// collapse to zero and contribute nothing to the correlation.
fn normalize(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Extended short-time intelligibility score between a clean reference
/// and a degraded version of the same signal.
pub fn estoi(clean: &Waveform, degraded: &Waveform) -> Result<f64, MetricsError> {
    if clean.sample_rate != degraded.sample_rate {
        return Err(MetricsError::RateMismatch(
            clean.sample_rate,
            degraded.sample_rate,
        ));
    }
    if clean.len() != degraded.len() {
        return Err(MetricsError::LengthMismatch(clean.len(), degraded.len()));
    }
    let c = resample(clean, TARGET_RATE);
    let d = resample(degraded, TARGET_RATE);
    let (c, d) = remove_silent_frames(&c.samples, &d.samples)?;
    let env_c = band_envelopes(&c);
    let env_d = band_envelopes(&d);
    let num_frames = env_c[0].len();
    if num_frames < SEGMENT_FRAMES {
        return Err(MetricsError::TooShort(num_frames, SEGMENT_FRAMES));
    }

    let mut total = 0.0;
    let mut xm = vec![vec![0.0; SEGMENT_FRAMES]; NUM_BANDS];
    let mut ym = vec![vec![0.0; SEGMENT_FRAMES]; NUM_BANDS];
    for last in SEGMENT_FRAMES - 1..num_frames {
        let start = last + 1 - SEGMENT_FRAMES;
        for k in 0..NUM_BANDS {
            xm[k].copy_from_slice(&env_c[k][start..=last]);
            ym[k].copy_from_slice(&env_d[k][start..=last]);
            normalize(&mut xm[k]);
            normalize(&mut ym[k]);
        }
        let mut segment = 0.0;
        for n in 0..SEGMENT_FRAMES {
            let mut col_x: Vec<f64> = (0..NUM_BANDS).map(|k| xm[k][n]).collect();
            let mut col_y: Vec<f64> = (0..NUM_BANDS).map(|k| ym[k][n]).collect();
            normalize(&mut col_x);
            normalize(&mut col_y);
            segment += col_x.iter().zip(&col_y).map(|(a, b)| a * b).sum::<f64>();
        }
        total += segment / SEGMENT_FRAMES as f64;
    }
    Ok(total / (num_frames - SEGMENT_FRAMES + 1) as f64)
}
