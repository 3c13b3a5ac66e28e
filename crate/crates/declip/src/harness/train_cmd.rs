//! Network training over a prepared dataset.
//!
//! Builds (normalized clipped, raw clean) spectrum image pairs from
//! every train-split entry, so one model sees all clipping severities,
//! then trains and writes a checkpoint plus a per-epoch loss CSV.

use std::fs;
use std::path::{Path, PathBuf};

use crate::signal::{extract_images, read_wav, stft, LogMagImage, StftConfig};
use crate::unet::{save_model, train, TrainConfig, TrainReport, UNetConfig, UNetModel};

use super::manifest::{DatasetManifest, Split};
use super::run::restore_saturation;
use super::HarnessError;

#[derive(Debug, Clone)]
pub struct TrainCommandOptions {
    pub unet: UNetConfig,
    pub train: TrainConfig,
    /// Seeds the weight initialization (batch order is seeded by
    /// `train.seed`).
    pub model_seed: u64,
    pub checkpoint_path: PathBuf,
    pub loss_csv_path: PathBuf,
}

/// Collects the image pairs of every train-split entry, in manifest
/// order. Inputs are per-utterance normalized, targets stay raw.
pub fn collect_training_pairs(
    root: &Path,
    manifest: &DatasetManifest,
    stft_cfg: &StftConfig,
) -> Result<Vec<(LogMagImage, LogMagImage)>, HarnessError> {
    let mut pairs = Vec::new();
    for entry in manifest.entries_in(Split::Train) {
        let clean = read_wav(&root.join(&entry.clean_path))?;
        let clipped = restore_saturation(
            &read_wav(&root.join(&entry.clipped_path))?,
            entry.threshold,
        );
        let inputs = extract_images(&stft(&clipped, stft_cfg)?, true);
        let targets = extract_images(&stft(&clean, stft_cfg)?, false);
        debug_assert_eq!(inputs.len(), targets.len());
        pairs.extend(inputs.into_iter().zip(targets));
    }
    Ok(pairs)
}

/// Trains a fresh model on the manifest's train split and writes the
/// checkpoint and loss curve. Returns the model and its loss trace.
pub fn train_command(
    root: &Path,
    manifest: &DatasetManifest,
    opts: &TrainCommandOptions,
) -> Result<(UNetModel, TrainReport), HarnessError> {
    let stft_cfg = StftConfig::for_image_side(opts.unet.image_size)?;
    let pairs = collect_training_pairs(root, manifest, &stft_cfg)?;
    if pairs.is_empty() {
        return Err(HarnessError::Data("manifest has no train entries".into()));
    }
    let mut model = UNetModel::new(opts.unet, opts.model_seed)?;
    let report = train(&mut model, &pairs, &opts.train)?;

    save_model(&model, &opts.checkpoint_path)?;
    let mut csv = String::from("epoch,mse\n");
    for (i, loss) in report.epoch_losses.iter().enumerate() {
        csv.push_str(&format!("{},{loss}\n", i + 1));
    }
    fs::write(&opts.loss_csv_path, csv)?;
    Ok((model, report))
}
