//! Experiment orchestration: dataset preparation, declipper execution,
//! evaluation tables, the additive-noise sweep, and spectrogram export.
//!
//! Everything is file based and deterministic. A prepared dataset lives
//! in one directory (clean and clipped WAVs plus `manifest.json`),
//! declipper outputs mirror it under a method subdirectory, and the
//! evaluators write per-utterance CSVs plus per-metric summary tables.

pub mod manifest;
pub mod prepare;
pub mod run;
pub mod spectrogram;
pub mod synth;
pub mod table;
pub mod train_cmd;

pub use manifest::{DatasetManifest, ManifestEntry, Split};
pub use prepare::{prepare_dataset, PrepareOptions};
pub use run::{evaluate_run, noise_sweep, run_declip, Method, RunLog, RunOptions, UtteranceScore};
pub use spectrogram::{export_spectrogram, SpectrogramFormat};
pub use synth::synth_utterance;
pub use table::ResultsTable;
pub use train_cmd::{train_command, TrainCommandOptions};

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::signal::SignalError;
use crate::unet::UnetError;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad flags, grids, or method selection (exit code 1).
    #[error("configuration error: {0}")]
    Config(String),
    /// Missing or malformed input data (exit code 2).
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Unet(#[from] UnetError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
