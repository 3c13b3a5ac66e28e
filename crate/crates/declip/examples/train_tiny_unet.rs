//! Trains a miniature network on a handful of image pairs.
//!
//! The model here is far below the size used for real runs (16 pixel
//! images, two resolution levels) so the whole demonstration finishes in
//! seconds. It overfits a fixed batch, which is the quickest way to see
//! the backward pass and the optimizer doing their jobs. Run with:
//!
//! ```text
//! cargo run --release --example train_tiny_unet
//! ```

use declip::harness::synth_utterance;
use declip::signal::{clip, extract_images, stft, threshold_for_sdr, StftConfig};
use declip::unet::{enhance, train, TrainConfig, UNetConfig, UNetModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Image pairs: clipped input (normalized), clean target (raw scale).
    let config = StftConfig::for_image_side(16)?;
    let mut pairs = Vec::new();
    for seed in 0..3u64 {
        let clean = synth_utterance(seed, 16_000, 0.5);
        let theta = threshold_for_sdr(&clean, 1.5)?;
        let clipped = clip(&clean, theta);
        let inputs = extract_images(&stft(&clipped, &config)?, true);
        let targets = extract_images(&stft(&clean, &config)?, false);
        pairs.extend(inputs.into_iter().zip(targets));
    }
    println!("{} training pairs of 16x16 images", pairs.len());

    let unet_cfg = UNetConfig {
        depth: 2,
        base_filters: 4,
        image_size: 16,
    };
    let mut model = UNetModel::new(unet_cfg, 0)?;
    println!("model has {} parameters", model.parameter_count());

    let train_cfg = TrainConfig {
        epochs: 40,
        batch_size: pairs.len(),
        learning_rate: 2e-3,
        seed: 0,
    };
    let report = train(&mut model, &pairs, &train_cfg)?;

    println!();
    println!("epoch  loss");
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        if epoch % 8 == 0 || epoch + 1 == report.epoch_losses.len() {
            println!("{:>5}  {:.6}", epoch + 1, loss);
        }
    }
    let first = report.epoch_losses[0];
    let last = *report.epoch_losses.last().unwrap();
    println!();
    println!("loss shrank {:.0}x on the fixed batch", first / last);

    // Inference: run the trained model over the first input image.
    let outputs = enhance(&model, &[pairs[0].0.clone()])?;
    println!(
        "enhanced image 0: {} valid rows carried through",
        outputs[0].valid_frames
    );
    Ok(())
}
