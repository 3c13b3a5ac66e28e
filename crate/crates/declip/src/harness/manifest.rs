//! Dataset manifest: which utterances exist, how they were clipped, and
//! which split each belongs to. Stored as pretty JSON next to the audio.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

/// One (utterance, clipping level) pair. Paths are relative to the
/// dataset root so the directory can be moved freely.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub utterance_id: String,
    pub split: Split,
    pub clean_path: PathBuf,
    pub clipped_path: PathBuf,
    /// Requested clipping severity as input SDR in dB.
    pub clip_sdr_target_db: f64,
    /// Clipping threshold realizing the target on this utterance.
    pub threshold: f64,
    /// SDR re-measured from the written files.
    pub realized_sdr_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub sample_rate: u32,
    /// `"synthetic"` or the source corpus directory.
    pub corpus_source: String,
    pub num_utterances: usize,
    pub train_grid_db: Vec<f64>,
    pub test_grid_db: Vec<f64>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn save(&self, root: &Path) -> Result<(), HarnessError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Data(format!("manifest serialization: {e}")))?;
        fs::write(root.join(MANIFEST_NAME), json)?;
        Ok(())
    }

    pub fn load(root: &Path) -> Result<Self, HarnessError> {
        let path = root.join(MANIFEST_NAME);
        let json = fs::read_to_string(&path)
            .map_err(|e| HarnessError::Data(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&json)
            .map_err(|e| HarnessError::Data(format!("malformed manifest: {e}")))
    }

    pub fn entries_in(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Distinct utterance ids of one split, in manifest order.
    pub fn utterances_in(&self, split: Split) -> Vec<String> {
        let mut seen = Vec::new();
        for e in self.entries_in(split) {
            if !seen.contains(&e.utterance_id) {
                seen.push(e.utterance_id.clone());
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_manifest() -> DatasetManifest {
        DatasetManifest {
            seed: 3,
            sample_rate: 16_000,
            corpus_source: "synthetic".into(),
            num_utterances: 2,
            train_grid_db: vec![1.0, 2.0],
            test_grid_db: vec![0.5],
            entries: vec![
                ManifestEntry {
                    utterance_id: "utt_000".into(),
                    split: Split::Train,
                    clean_path: "clean/utt_000.wav".into(),
                    clipped_path: "clipped/utt_000_sdr1.wav".into(),
                    clip_sdr_target_db: 1.0,
                    threshold: 0.12,
                    realized_sdr_db: 1.02,
                },
                ManifestEntry {
                    utterance_id: "utt_001".into(),
                    split: Split::Test,
                    clean_path: "clean/utt_001.wav".into(),
                    clipped_path: "clipped/utt_001_sdr0.5.wav".into(),
                    clip_sdr_target_db: 0.5,
                    threshold: 0.07,
                    realized_sdr_db: 0.49,
                },
            ],
        }
    }

    #[test]
    fn round_trips_through_json() {
        let dir = tempdir().unwrap();
        let m = sample_manifest();
        m.save(dir.path()).unwrap();
        let loaded = DatasetManifest::load(dir.path()).unwrap();
        assert_eq!(loaded.entries.len(), 2);
        assert_eq!(loaded.entries[0].utterance_id, "utt_000");
        assert_eq!(loaded.entries[1].split, Split::Test);
        assert_eq!(loaded.entries[1].threshold, 0.07);
    }

    #[test]
    fn split_filters_work() {
        let m = sample_manifest();
        assert_eq!(m.entries_in(Split::Train).count(), 1);
        assert_eq!(m.entries_in(Split::Dev).count(), 0);
        assert_eq!(m.utterances_in(Split::Test), vec!["utt_001".to_string()]);
    }

    #[test]
    fn missing_manifest_is_a_data_error() {
        let dir = tempdir().unwrap();
        assert!(matches!(
            DatasetManifest::load(dir.path()),
            Err(HarnessError::Data(_))
        ));
    }
}
