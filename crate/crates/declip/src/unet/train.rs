//! Training and inference over spectrum image pairs.
//!
//! The network learns normalized clipped images as input and raw clean
//! log magnitudes as target. The loss masks out padding rows (frames
//! past `valid_frames`) so partially filled tail segments do not pull
//! the network toward the log floor.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::signal::LogMagImage;

use super::layers::AdamConfig;
use super::model::UNetModel;
use super::tensor::Tensor4;
use super::UnetError;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Seeds the batch shuffling only; model weights are seeded at
    /// construction time.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 5,
            learning_rate: 2e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Mean per-step loss of each epoch, in order.
    pub epoch_losses: Vec<f64>,
}

fn stack_images(images: &[&LogMagImage]) -> Tensor4 {
    let side = images[0].side;
    let mut data = Vec::with_capacity(images.len() * side * side);
    for im in images {
        data.extend_from_slice(&im.pixels);
    }
    Tensor4::from_vec(data, images.len(), 1, side, side)
}

/// Masked mean squared error between a batch prediction and target
/// images, averaged over valid pixels only. Returns the loss and its
/// gradient with respect to the prediction (zero on padding rows).
pub fn mse_loss(pred: &Tensor4, targets: &[&LogMagImage]) -> (f64, Tensor4) {
    let (n, _, h, w) = pred.shape();
    assert_eq!(n, targets.len());
    let n_valid: usize = targets.iter().map(|t| t.valid_frames * w).sum();
    let n_valid = n_valid.max(1) as f64;
    let mut grad = Tensor4::zeros(n, 1, h, w);
    let mut loss = 0.0;
    for (b, target) in targets.iter().enumerate() {
        let p = pred.plane(b, 0);
        let g = grad.plane_mut(b, 0);
        let limit = target.valid_frames * w;
        for i in 0..limit {
            let d = p[i] - target.pixels[i];
            loss += d * d;
            g[i] = 2.0 * d / n_valid;
        }
    }
    (loss / n_valid, grad)
}

/// Runs minibatch Adam over `(clipped, clean)` image pairs and returns
/// the per-epoch loss trace. Pairs are shuffled each epoch; with fewer
/// pairs than `batch_size` every step uses all of them.
pub fn train(
    model: &mut UNetModel,
    pairs: &[(LogMagImage, LogMagImage)],
    cfg: &TrainConfig,
) -> Result<TrainReport, UnetError> {
    if pairs.is_empty() {
        return Err(UnetError::BadConfig("no training pairs".into()));
    }
    let side = model.config.image_size;
    if pairs.iter().any(|(a, b)| a.side != side || b.side != side) {
        return Err(UnetError::ShapeMismatch(format!(
            "training images must be {side}x{side}"
        )));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(UnetError::BadConfig(
            "epochs and batch_size must be positive".into(),
        ));
    }

    let adam = AdamConfig::with_learning_rate(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let batch = cfg.batch_size.min(pairs.len());
    let steps_per_epoch = pairs.len() / batch;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for step in 0..steps_per_epoch {
            let ids = &order[step * batch..(step + 1) * batch];
            let inputs: Vec<&LogMagImage> = ids.iter().map(|&i| &pairs[i].0).collect();
            let targets: Vec<&LogMagImage> = ids.iter().map(|&i| &pairs[i].1).collect();
            let x = stack_images(&inputs);
            let (pred, tape) = model.forward_train(&x)?;
            let (loss, grad) = mse_loss(&pred, &targets);
            model.zero_grads();
            model.backward(&tape, &grad);
            model.adam_step(&adam);
            epoch_loss += loss;
        }
        epoch_losses.push(epoch_loss / steps_per_epoch as f64);
    }
    Ok(TrainReport { epoch_losses })
}

/// Runs the network over clipped images and returns enhanced images.
///
/// Outputs are in the raw log magnitude domain (no normalization stats
/// to undo), with `valid_frames` and `segment_index` carried over from
/// the inputs so they feed straight into reconstruction.
pub fn enhance(
    model: &UNetModel,
    images: &[LogMagImage],
) -> Result<Vec<LogMagImage>, UnetError> {
    let side = model.config.image_size;
    let mut out = Vec::with_capacity(images.len());
    for image in images {
        if image.side != side {
            return Err(UnetError::ShapeMismatch(format!(
                "expected {side}x{side} image, got {}x{}",
                image.side, image.side
            )));
        }
        let x = stack_images(&[image]);
        let y = model.forward(&x)?;
        out.push(LogMagImage {
            pixels: y.plane(0, 0).to_vec(),
            side,
            valid_frames: image.valid_frames,
            segment_index: image.segment_index,
            norm_mean: 0.0,
            norm_std: 1.0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unet::model::UNetConfig;
    use rand::Rng;

    fn image(side: usize, valid: usize, seg: usize, seed: u64) -> LogMagImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LogMagImage {
            pixels: (0..side * side).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            side,
            valid_frames: valid,
            segment_index: seg,
            norm_mean: 0.0,
            norm_std: 1.0,
        }
    }

    #[test]
    fn loss_of_identical_images_is_zero() {
        let t = image(8, 8, 0, 1);
        let pred = stack_images(&[&t]);
        let (loss, grad) = mse_loss(&pred, &[&t]);
        assert_eq!(loss, 0.0);
        assert!(grad.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn loss_matches_hand_computation_with_padding_mask() {
        let side = 4;
        let mut target = image(side, 2, 0, 2);
        // Padding rows in the target differ wildly from the prediction;
        // they must not contribute.
        for v in &mut target.pixels[2 * side..] {
            *v = 1e6;
        }
        let pred = Tensor4::zeros(1, 1, side, side);
        let expect: f64 = target.pixels[..2 * side].iter().map(|v| v * v).sum::<f64>()
            / (2 * side) as f64;
        let (loss, grad) = mse_loss(&pred, &[&target]);
        assert!((loss - expect).abs() < 1e-12);
        assert!(grad.as_slice()[2 * side..].iter().all(|&g| g == 0.0));
        // d/dp (p - t)^2 / n at p = 0 is -2 t / n.
        assert!(
            (grad.as_slice()[0] + 2.0 * target.pixels[0] / (2 * side) as f64).abs() < 1e-12
        );
    }

    fn smooth_pair(side: usize, seed: u64) -> (LogMagImage, LogMagImage) {
        // Smooth, mean zero images with a deterministic input/target link
        // so a small network can actually fit them.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fx: f64 = rng.gen_range(1.0..3.0);
        let fy: f64 = rng.gen_range(1.0..3.0);
        let mut input = vec![0.0; side * side];
        let mut target = vec![0.0; side * side];
        for t in 0..side {
            for f in 0..side {
                let v = (fx * t as f64 / side as f64 * std::f64::consts::TAU).sin()
                    * (fy * f as f64 / side as f64 * std::f64::consts::TAU).cos();
                input[t * side + f] = v;
                target[t * side + f] = 0.5 * v;
            }
        }
        let mk = |pixels| LogMagImage {
            pixels,
            side,
            valid_frames: side,
            segment_index: 0,
            norm_mean: 0.0,
            norm_std: 1.0,
        };
        (mk(input), mk(target))
    }

    #[test]
    fn training_reduces_the_loss() {
        let cfg = UNetConfig {
            depth: 2,
            base_filters: 4,
            image_size: 16,
        };
        let mut model = UNetModel::new(cfg, 5).unwrap();
        let pairs: Vec<_> = (0..4).map(|i| smooth_pair(16, 100 + i)).collect();
        let tc = TrainConfig {
            epochs: 40,
            batch_size: 4,
            learning_rate: 1e-3,
            seed: 7,
        };
        let report = train(&mut model, &pairs, &tc).unwrap();
        let first = report.epoch_losses[0];
        let last = *report.epoch_losses.last().unwrap();
        assert!(
            last < first * 0.5,
            "loss went from {first} to {last} without halving"
        );
    }

    #[test]
    fn training_is_deterministic_for_a_fixed_seed() {
        let cfg = UNetConfig {
            depth: 2,
            base_filters: 2,
            image_size: 8,
        };
        let pairs: Vec<_> = (0..7).map(|i| smooth_pair(8, 200 + i)).collect();
        let tc = TrainConfig {
            epochs: 3,
            batch_size: 3,
            learning_rate: 1e-3,
            seed: 11,
        };
        let run = || {
            let mut model = UNetModel::new(cfg, 5).unwrap();
            let report = train(&mut model, &pairs, &tc).unwrap();
            let mut weights = Vec::new();
            model.visit_layers(&mut |l| weights.extend_from_slice(&l.weights));
            (report.epoch_losses, weights)
        };
        let (la, wa) = run();
        let (lb, wb) = run();
        assert_eq!(la, lb);
        assert_eq!(wa, wb);
    }

    #[test]
    fn enhance_preserves_image_metadata() {
        let model = UNetModel::new(
            UNetConfig {
                depth: 2,
                base_filters: 2,
                image_size: 8,
            },
            3,
        )
        .unwrap();
        let inputs = vec![image(8, 5, 0, 4), image(8, 8, 1, 5)];
        let out = enhance(&model, &inputs).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].valid_frames, 5);
        assert_eq!(out[1].segment_index, 1);
        assert_eq!(out[0].norm_mean, 0.0);
        assert_eq!(out[0].norm_std, 1.0);
    }

    #[test]
    fn mismatched_image_size_is_rejected() {
        let mut model = UNetModel::new(
            UNetConfig {
                depth: 2,
                base_filters: 2,
                image_size: 8,
            },
            3,
        )
        .unwrap();
        let pair = (image(16, 16, 0, 1), image(16, 16, 0, 2));
        assert!(train(&mut model, &[pair], &TrainConfig::default()).is_err());
        assert!(enhance(&model, &[image(16, 16, 0, 1)]).is_err());
    }
}
