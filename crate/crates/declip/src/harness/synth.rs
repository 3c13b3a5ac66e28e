//! Deterministic speech-like test signals.
//!
//! Real recordings are not always at hand, so the harness can fabricate
//! utterances that exercise the same code paths: syllable-like bursts
//! of harmonic tone with per-syllable pitch glides and formant-shaped
//! spectra, occasional noise bursts in place of a voiced syllable, and
//! short pauses in between. The syllable rhythm gives the band
//! envelopes the kind of modulation that intelligibility scoring
//! responds to; a stationary tone would leave it measuring noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::signal::Waveform;

/// Peak amplitude of a synthesized utterance before the noise floor.
pub const PEAK_LEVEL: f64 = 0.8;

/// Standard deviation of the additive noise floor. It keeps silence and
/// sustained tones from being perfectly predictable, which degenerate
/// inputs aside is also how real recordings behave.
pub const NOISE_FLOOR_STD: f64 = 0.004;

/// Gain of one formant resonance at frequency `f`.
fn formant_gain(f: f64, center: f64, bandwidth: f64) -> f64 {
    let d = (f - center) / bandwidth;
    (-0.5 * d * d).exp()
}

/// Synthesizes one speech-like utterance. The same seed always produces
/// the same samples at a given rate and length.
pub fn synth_utterance(seed: u64, sample_rate: u32, seconds: f64) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = sample_rate as f64;
    let dt = 1.0 / rate;
    let len = (seconds * rate).round() as usize;
    let mut samples = vec![0.0f64; len];

    // Speaker-level parameters shared by every syllable.
    let base_f0: f64 = rng.gen_range(100.0..240.0);
    let vibrato_rate: f64 = rng.gen_range(4.0..6.5);
    let vibrato_depth: f64 = rng.gen_range(0.005..0.02);

    let mut t0 = 0usize;
    while t0 < len {
        let syl_len = ((rng.gen_range(0.12..0.25) * rate) as usize).max(1);
        let pause_len = (rng.gen_range(0.04..0.10) * rate) as usize;
        let end = (t0 + syl_len).min(len);
        let amp: f64 = rng.gen_range(0.5..1.0);
        let attack = ((0.015 * rate) as usize).min(syl_len / 3).max(1);
        let release = ((0.030 * rate) as usize).min(syl_len / 3).max(1);

        if rng.gen_bool(0.8) {
            // Voiced syllable: harmonics under a two-formant envelope,
            // with the pitch gliding across the syllable.
            let f0_start = base_f0 * 2f64.powf(rng.gen_range(-0.3..0.3));
            let f0_end = base_f0 * 2f64.powf(rng.gen_range(-0.3..0.3));
            let f1 = rng.gen_range(300.0..900.0);
            let b1 = rng.gen_range(80.0..150.0);
            let f2 = rng.gen_range(900.0..2500.0);
            let b2 = rng.gen_range(150.0..300.0);
            let tilt: f64 = rng.gen_range(0.5..1.0);

            // Per-harmonic gains at the mid-syllable pitch; the glide is
            // small enough that the envelope need not track it.
            let f0_mid = 0.5 * (f0_start + f0_end);
            let num_harmonics = ((0.45 * rate / f0_mid) as usize).max(1);
            let gains: Vec<f64> = (1..=num_harmonics)
                .map(|h| {
                    let fh = f0_mid * h as f64;
                    let resonance = formant_gain(fh, f1, b1) + formant_gain(fh, f2, b2) + 0.05;
                    resonance / (h as f64).powf(tilt)
                })
                .collect();
            let phases: Vec<f64> = (0..num_harmonics)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();

            let mut phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            for i in t0..end {
                let frac = (i - t0) as f64 / syl_len as f64;
                let tt = i as f64 * dt;
                let vibrato =
                    1.0 + vibrato_depth * (std::f64::consts::TAU * vibrato_rate * tt).sin();
                let f0 = (f0_start + (f0_end - f0_start) * frac) * vibrato;
                phase += std::f64::consts::TAU * f0 * dt;
                let env = edge_ramp(i - t0, attack) * edge_ramp(end - 1 - i, release);
                let mut v = 0.0;
                for (h, (&g, &p)) in gains.iter().zip(&phases).enumerate() {
                    let k = (h + 1) as f64;
                    if f0 * k < 0.48 * rate {
                        v += g * (phase * k + p).sin();
                    }
                }
                samples[i] = amp * env * v;
            }
        } else {
            // Unvoiced syllable: high-tilted noise burst standing in for
            // a fricative. Kept quieter than the voiced material.
            let burst_amp = 0.4 * amp;
            let mut prev = 0.0;
            for i in t0..end {
                let env = edge_ramp(i - t0, attack) * edge_ramp(end - 1 - i, release);
                let white: f64 = rng.gen_range(-1.0..1.0);
                // First difference tilts the noise toward high frequencies.
                let v = white - 0.6 * prev;
                prev = white;
                samples[i] = burst_amp * env * v;
            }
        }
        t0 = end + pause_len;
    }

    let peak = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak > 0.0 {
        let gain = PEAK_LEVEL / peak;
        for s in &mut samples {
            *s *= gain;
        }
    }
    let noise = Normal::new(0.0, NOISE_FLOOR_STD).expect("finite std");
    for s in &mut samples {
        *s += noise.sample(&mut rng);
    }
    Waveform::new(samples, sample_rate)
}

/// Raised-cosine ramp from 0 at `distance == 0` to 1 at `distance >= width`.
fn edge_ramp(distance: usize, width: usize) -> f64 {
    if distance >= width {
        1.0
    } else {
        let x = distance as f64 / width as f64;
        0.5 * (1.0 - (std::f64::consts::PI * x).cos())
    }
}
