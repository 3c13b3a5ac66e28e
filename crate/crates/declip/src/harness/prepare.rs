//! Dataset preparation: split assignment, threshold solving, and clipped
//! WAV generation.
//!
//! Utterances come either from a directory of mono 16-bit WAVs or from
//! the synthesizer. Splits are utterance-disjoint at roughly 75/10/15.
//! Train utterances are clipped at the training grid, dev and test
//! utterances at the evaluation grid. All bookkeeping happens on the
//! 16-bit quantized signals read back from disk, so every number in the
//! manifest re-measures exactly from the files.

use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::signal::{clip, read_wav, sdr_db, threshold_for_sdr, write_wav, SignalError, Waveform};

use super::manifest::{DatasetManifest, ManifestEntry, Split};
use super::synth::synth_utterance;
use super::HarnessError;

/// Realized clipping SDR may deviate from the target by at most this.
pub const SDR_TOLERANCE_DB: f64 = 0.05;

pub const DEFAULT_TRAIN_GRID: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 15.0, 20.0];
pub const DEFAULT_TEST_GRID: [f64; 6] = [0.5, 1.5, 3.5, 7.5, 12.5, 17.5];

#[derive(Debug, Clone)]
pub struct PrepareOptions {
    pub out_dir: PathBuf,
    /// Directory of source WAVs; `None` generates a synthetic corpus.
    pub corpus_dir: Option<PathBuf>,
    pub synthetic_count: usize,
    pub synthetic_seconds: f64,
    pub sample_rate: u32,
    pub train_grid_db: Vec<f64>,
    pub test_grid_db: Vec<f64>,
    pub seed: u64,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            out_dir: PathBuf::from("dataset"),
            corpus_dir: None,
            synthetic_count: 10,
            synthetic_seconds: 1.0,
            sample_rate: 16_000,
            train_grid_db: DEFAULT_TRAIN_GRID.to_vec(),
            test_grid_db: DEFAULT_TEST_GRID.to_vec(),
            seed: 0,
        }
    }
}

/// Split sizes: train and dev round to 75% and 10%, the rest is test.
/// When rounding would leave the test split empty, train gives one up.
fn split_sizes(n: usize) -> (usize, usize, usize) {
    let mut n_train = (0.75 * n as f64).round() as usize;
    let mut n_dev = (0.10 * n as f64).round() as usize;
    n_dev = n_dev.min(n - n_train.min(n));
    if n >= 3 && n_train + n_dev >= n {
        n_train = n - n_dev - 1;
    }
    (n_train, n_dev, n - n_train - n_dev)
}

fn label_for(db: f64) -> String {
    format!("{db}")
}

fn load_corpus(opts: &PrepareOptions) -> Result<Vec<(String, Waveform)>, HarnessError> {
    match &opts.corpus_dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| HarnessError::Data(format!("cannot read {}: {e}", dir.display())))?
                .filter_map(|r| r.ok().map(|d| d.path()))
                .filter(|p| p.extension().map_or(false, |e| e == "wav"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(HarnessError::Data(format!(
                    "no .wav files in {}",
                    dir.display()
                )));
            }
            let mut corpus = Vec::with_capacity(paths.len());
            for path in paths {
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let wave = read_wav(&path)?;
                corpus.push((id, wave));
            }
            Ok(corpus)
        }
        None => {
            if opts.synthetic_count == 0 {
                return Err(HarnessError::Config(
                    "synthetic corpus needs at least one utterance".into(),
                ));
            }
            Ok((0..opts.synthetic_count)
                .map(|i| {
                    let id = format!("utt_{i:03}");
                    let wave = synth_utterance(
                        opts.seed.wrapping_add(i as u64),
                        opts.sample_rate,
                        opts.synthetic_seconds,
                    );
                    (id, wave)
                })
                .collect())
        }
    }
}

/// Builds the dataset directory (`clean/`, `clipped/`, `manifest.json`)
/// and returns the manifest. Unattainable clipping targets are reported
/// on stderr and skipped.
pub fn prepare_dataset(opts: &PrepareOptions) -> Result<DatasetManifest, HarnessError> {
    if opts.train_grid_db.is_empty() || opts.test_grid_db.is_empty() {
        return Err(HarnessError::Config("clipping grids must be non-empty".into()));
    }
    let corpus = load_corpus(opts)?;
    let sample_rate = corpus[0].1.sample_rate;
    if corpus.iter().any(|(_, w)| w.sample_rate != sample_rate) {
        return Err(HarnessError::Data("mixed sample rates in corpus".into()));
    }

    let root = &opts.out_dir;
    fs::create_dir_all(root.join("clean"))?;
    fs::create_dir_all(root.join("clipped"))?;

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    order.shuffle(&mut rng);
    let (n_train, n_dev, _) = split_sizes(corpus.len());
    let split_of = |pos: usize| {
        if pos < n_train {
            Split::Train
        } else if pos < n_train + n_dev {
            Split::Dev
        } else {
            Split::Test
        }
    };

    let mut entries = Vec::new();
    for (pos, &utt) in order.iter().enumerate() {
        let (id, raw) = &corpus[utt];
        let split = split_of(pos);
        let clean_rel = PathBuf::from("clean").join(format!("{id}.wav"));
        write_wav(&root.join(&clean_rel), raw)?;
        // Work from the quantized signal so recorded thresholds and SDRs
        // match what any later reader of the file will see.
        let clean = read_wav(&root.join(&clean_rel))?;

        let grid = match split {
            Split::Train => &opts.train_grid_db,
            _ => &opts.test_grid_db,
        };
        for &target in grid {
            let threshold = match threshold_for_sdr(&clean, target) {
                Ok(t) => t,
                Err(SignalError::UnattainableSdr { .. }) => {
                    eprintln!("skipping {id} at {target} dB: target not attainable");
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let clipped_rel =
                PathBuf::from("clipped").join(format!("{id}_sdr{}.wav", label_for(target)));
            write_wav(&root.join(&clipped_rel), &clip(&clean, threshold))?;
            let clipped = read_wav(&root.join(&clipped_rel))?;
            let realized = sdr_db(&clean, &clipped)?;
            if (realized - target).abs() > SDR_TOLERANCE_DB {
                eprintln!(
                    "skipping {id} at {target} dB: realized {realized:.3} dB off target"
                );
                continue;
            }
            entries.push(ManifestEntry {
                utterance_id: id.clone(),
                split,
                clean_path: clean_rel.clone(),
                clipped_path: clipped_rel,
                clip_sdr_target_db: target,
                threshold,
                realized_sdr_db: realized,
            });
        }
    }

    // Manifest order: by split, then utterance id, then severity.
    entries.sort_by(|a, b| {
        let split_rank = |s: Split| match s {
            Split::Train => 0,
            Split::Dev => 1,
            Split::Test => 2,
        };
        split_rank(a.split)
            .cmp(&split_rank(b.split))
            .then(a.utterance_id.cmp(&b.utterance_id))
            .then(a.clip_sdr_target_db.total_cmp(&b.clip_sdr_target_db))
    });

    let manifest = DatasetManifest {
        seed: opts.seed,
        sample_rate,
        corpus_source: opts
            .corpus_dir
            .as_ref()
            .map(|d| d.display().to_string())
            .unwrap_or_else(|| "synthetic".into()),
        num_utterances: corpus.len(),
        train_grid_db: opts.train_grid_db.clone(),
        test_grid_db: opts.test_grid_db.clone(),
        entries,
    };
    manifest.save(root)?;
    Ok(manifest)
}
