//! The IHT solvers and the frame-based signal declipper built on them.

use crate::signal::stft::hann_window;
use crate::signal::Waveform;

use super::{consistency_project, ClipMask, Dictionary, SampleLabel};

/// Knobs for the frame solver. Frame length and atom count live in the
/// [`Dictionary`]; this carries the schedule and framing parameters.
#[derive(Debug, Clone, Copy)]
pub struct SparseSolverConfig {
    /// Hop between analysis frames in [`declip_signal`].
    pub frame_shift: usize,
    /// Inner iteration budget before the sparsity level grows.
    pub max_iters_per_k: usize,
    /// Largest sparsity level; `None` means an eighth of the frame length.
    pub k_cap: Option<usize>,
    /// Relative residual below which a frame counts as solved.
    pub tolerance: f64,
}

impl Default for SparseSolverConfig {
    fn default() -> Self {
        SparseSolverConfig {
            frame_shift: 128,
            max_iters_per_k: 50,
            k_cap: None,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverVariant {
    /// Fit reliable samples only; clipped samples are unconstrained.
    Iht,
    /// Additionally require saturated samples to stay beyond the threshold.
    ConsistentIht,
}

/// Result of declipping one frame.
#[derive(Debug, Clone)]
pub struct FrameSolution {
    /// Final frame estimate (reliable samples restored; for the consistent
    /// variant, fully projected onto the clipping constraints).
    pub samples: Vec<f64>,
    /// Raw sparse synthesis `D * a` before any sample overwrites.
    pub synthesis: Vec<f64>,
    /// Nonzero coefficients as (atom index, value) pairs.
    pub coefficients: Vec<(usize, f64)>,
    /// Whether the residual dropped below the configured tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// True when the frame had no reliable samples and was passed through.
    pub skipped: bool,
    /// Accepted residual norm per iteration, tagged with the sparsity
    /// level in force; within one level the norms never increase.
    pub residual_trace: Vec<(usize, f64)>,
}

fn residual_into(
    r: &mut [f64],
    x_hat: &[f64],
    y: &[f64],
    mask: &ClipMask,
    variant: SolverVariant,
) -> f64 {
    let t = mask.threshold;
    let mut norm_sq = 0.0;
    for i in 0..y.len() {
        let v = match (mask.labels[i], variant) {
            (SampleLabel::Reliable, _) => y[i] - x_hat[i],
            (_, SolverVariant::Iht) => 0.0,
            (SampleLabel::ClippedPositive, SolverVariant::ConsistentIht) => {
                (t - x_hat[i]).max(0.0)
            }
            (SampleLabel::ClippedNegative, SolverVariant::ConsistentIht) => {
                (-t - x_hat[i]).min(0.0)
            }
        };
        r[i] = v;
        norm_sq += v * v;
    }
    norm_sq.sqrt()
}

/// Declips a single frame by iterative hard thresholding with a growing
/// sparsity level.
///
/// Starting from zero coefficients and `k = 1`, each iteration takes a
/// gradient step on the residual, keeps the `k` largest coefficients and
/// re-synthesizes. The step size starts at `1 / ||D||^2` and halves
/// whenever a step would increase the residual. `k` grows by one when the
/// inner loop stalls or exhausts its budget, up to the cap.
pub fn declip_frame(
    y: &[f64],
    mask: &ClipMask,
    dict: &Dictionary,
    cfg: &SparseSolverConfig,
    variant: SolverVariant,
) -> FrameSolution {
    let n = dict.frame_len();
    assert_eq!(y.len(), n, "frame length does not match the dictionary");
    assert_eq!(mask.len(), n, "mask length does not match the frame");

    if mask.reliable_count() == 0 {
        return FrameSolution {
            samples: y.to_vec(),
            synthesis: y.to_vec(),
            coefficients: Vec::new(),
            converged: false,
            iterations: 0,
            skipped: true,
            residual_trace: Vec::new(),
        };
    }

    let n_atoms = dict.n_atoms();
    let k_cap = cfg.k_cap.unwrap_or(n / 8).max(1).min(n_atoms);
    let ref_norm = y
        .iter()
        .zip(&mask.labels)
        .filter(|(_, &l)| l == SampleLabel::Reliable)
        .map(|(&v, _)| v * v)
        .sum::<f64>()
        .sqrt()
        .max(1e-300);

    let mut mu = 1.0 / dict.norm_sq();
    let mut a = vec![0.0f64; n_atoms];
    let mut x_hat = vec![0.0f64; n];
    let mut r = vec![0.0f64; n];
    let mut r_norm = residual_into(&mut r, &x_hat, y, mask, variant);

    let mut g = vec![0.0f64; n_atoms];
    let mut b = vec![0.0f64; n_atoms];
    let mut order: Vec<u32> = (0..n_atoms as u32).collect();
    let mut x_cand = vec![0.0f64; n];
    let mut r_cand = vec![0.0f64; n];

    let mut k = 1usize;
    let mut iters_at_k = 0usize;
    let mut total = 0usize;
    let mut converged = r_norm <= cfg.tolerance * ref_norm;
    let mut trace = Vec::new();

    while !converged && total < k_cap * cfg.max_iters_per_k {
        dict.analyze(&r, &mut g);

        // Try the step, halving mu until the residual stops growing.
        let mut accepted = false;
        let mut cand_norm = r_norm;
        for _ in 0..40 {
            for j in 0..n_atoms {
                b[j] = a[j] + mu * g[j];
            }
            order.clear();
            order.extend(0..n_atoms as u32);
            let split = n_atoms - k;
            order.select_nth_unstable_by(split, |&i, &j| {
                b[i as usize].abs().total_cmp(&b[j as usize].abs())
            });
            x_cand.iter_mut().for_each(|v| *v = 0.0);
            for &j in &order[split..] {
                let c = b[j as usize];
                if c != 0.0 {
                    for (o, &atom_v) in x_cand.iter_mut().zip(dict.atom(j as usize)) {
                        *o += c * atom_v;
                    }
                }
            }
            cand_norm = residual_into(&mut r_cand, &x_cand, y, mask, variant);
            if cand_norm <= r_norm * (1.0 + 1e-12) {
                accepted = true;
                break;
            }
            mu *= 0.5;
        }
        if !accepted {
            break;
        }

        a.iter_mut().for_each(|v| *v = 0.0);
        for &j in &order[n_atoms - k..] {
            a[j as usize] = b[j as usize];
        }
        std::mem::swap(&mut x_hat, &mut x_cand);
        std::mem::swap(&mut r, &mut r_cand);
        let improvement = r_norm - cand_norm;
        let stalled = improvement <= 1e-4 * r_norm.max(1e-300);
        r_norm = cand_norm;
        total += 1;
        iters_at_k += 1;
        trace.push((k, r_norm));

        if r_norm <= cfg.tolerance * ref_norm {
            converged = true;
            break;
        }
        if stalled || iters_at_k >= cfg.max_iters_per_k {
            if k >= k_cap {
                break;
            }
            k += 1;
            iters_at_k = 0;
        }
    }

    let coefficients: Vec<(usize, f64)> = a
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    let mut samples = x_hat.clone();
    match variant {
        SolverVariant::Iht => {
            for i in 0..n {
                if mask.labels[i] == SampleLabel::Reliable {
                    samples[i] = y[i];
                }
            }
        }
        SolverVariant::ConsistentIht => consistency_project(&mut samples, y, mask),
    }

    FrameSolution {
        samples,
        synthesis: x_hat,
        coefficients,
        converged,
        iterations: total,
        skipped: false,
        residual_trace: trace,
    }
}

/// Result of declipping a whole signal.
#[derive(Debug, Clone)]
pub struct DeclipResult {
    pub waveform: Waveform,
    pub total_frames: usize,
    /// Frames passed through because every sample in them was clipped.
    pub skipped_frames: usize,
}

/// Declips a signal frame by frame and blends the results.
///
/// Frames are taken on the configured hop, each declipped independently,
/// and overlap-added under squared-Hann weights with per-sample weight
/// normalization. Blending can nudge samples off the clipping constraint
/// set, so a final full-signal [`consistency_project`] restores exact
/// consistency with the observation.
pub fn declip_signal(
    observed: &Waveform,
    threshold: f64,
    dict: &Dictionary,
    cfg: &SparseSolverConfig,
    variant: SolverVariant,
) -> DeclipResult {
    assert!(cfg.frame_shift > 0, "frame shift must be positive");
    let n = observed.len();
    let frame_len = dict.frame_len();
    if n == 0 {
        return DeclipResult {
            waveform: observed.clone(),
            total_frames: 0,
            skipped_frames: 0,
        };
    }

    let window = hann_window(frame_len);
    let w2: Vec<f64> = window.iter().map(|&w| w * w).collect();
    let num_frames = n.div_ceil(cfg.frame_shift);
    let mut numerator = vec![0.0f64; n];
    let mut weight = vec![0.0f64; n];
    let mut skipped = 0usize;
    let mut frame = vec![0.0f64; frame_len];

    for m in 0..num_frames {
        let offset = m * cfg.frame_shift;
        for t in 0..frame_len {
            frame[t] = observed.samples.get(offset + t).copied().unwrap_or(0.0);
        }
        let mask = ClipMask::from_samples(&frame, threshold);
        let solution = declip_frame(&frame, &mask, dict, cfg, variant);
        if solution.skipped {
            skipped += 1;
        }
        for t in 0..frame_len {
            let pos = offset + t;
            if pos < n {
                numerator[pos] += w2[t] * solution.samples[t];
                weight[pos] += w2[t];
            }
        }
    }

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        if weight[i] > 1e-12 {
            samples.push(numerator[i] / weight[i]);
        } else {
            // Only the very first sample can end up without window weight;
            // fall back to the observation there.
            samples.push(observed.samples[i]);
        }
    }
    let global_mask = ClipMask::from_samples(&observed.samples, threshold);
    consistency_project(&mut samples, &observed.samples, &global_mask);

    DeclipResult {
        waveform: Waveform::new(samples, observed.sample_rate),
        total_frames: num_frames,
        skipped_frames: skipped,
    }
}
