//! Declipper execution over a prepared dataset, evaluation into tables,
//! and the additive-noise sweep.
//!
//! All processing is file based: declippers read the clipped WAVs and
//! write their estimates under `run_dir/<method>/`, and the evaluators
//! score the written files against the clean references. Scoring the
//! files rather than in-memory buffers keeps every reported number
//! reproducible from the artifacts alone.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::metrics::evaluate;
use crate::signal::{
    add_gaussian_noise, clip, extract_images, read_wav, reconstruct, stft, threshold_for_sdr,
    write_wav, StftConfig, Waveform, I16_SCALE,
};
use crate::sparse::{declip_signal, Dictionary, SolverVariant, SparseSolverConfig};
use crate::unet::{enhance, load_model, UNetModel};

use super::manifest::{DatasetManifest, Split};
use super::table::ResultsTable;
use super::HarnessError;

/// Clipping severity used for every point of the noise sweep.
pub const SWEEP_CLIP_SDR_DB: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Copies the clipped input; the baseline row of every table.
    Passthrough,
    Iht,
    ConsIht,
    Unet,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Passthrough,
        Method::Iht,
        Method::ConsIht,
        Method::Unet,
    ];
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Passthrough => "passthrough",
            Method::Iht => "iht",
            Method::ConsIht => "cons-iht",
            Method::Unet => "unet",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "passthrough" => Ok(Method::Passthrough),
            "iht" => Ok(Method::Iht),
            "cons-iht" => Ok(Method::ConsIht),
            "unet" => Ok(Method::Unet),
            other => Err(format!(
                "unknown method '{other}' (expected passthrough, iht, cons-iht or unet)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Trained network for the `unet` method.
    pub checkpoint: Option<PathBuf>,
    /// Analysis frame length of the sparse declippers.
    pub frame_len: usize,
    /// Dictionary atom count of the sparse declippers.
    pub dict_atoms: usize,
    pub solver: SparseSolverConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            checkpoint: None,
            frame_len: 512,
            dict_atoms: 1024,
            solver: SparseSolverConfig::default(),
        }
    }
}

#[derive(Debug)]
pub struct RunLog {
    pub method: Method,
    pub processed: usize,
    /// `(clipped path, error)` for entries that could not be processed.
    pub failures: Vec<(String, String)>,
}

/// Snaps samples within one 16-bit quantization step of the clipping
/// threshold back to exactly the threshold. Clipped WAVs lose the exact
/// saturation level to quantization; without this the declippers would
/// misread saturated samples as reliable ones.
pub fn restore_saturation(x: &Waveform, threshold: f64) -> Waveform {
    let tol = 1.0 / I16_SCALE + 1e-12;
    let samples = x
        .samples
        .iter()
        .map(|&v| {
            if v >= threshold - tol {
                threshold
            } else if v <= -threshold + tol {
                -threshold
            } else {
                v
            }
        })
        .collect();
    Waveform::new(samples, x.sample_rate)
}

/// A declipper instantiated once per run; per-utterance state stays in
/// the call.
enum Engine {
    Passthrough,
    Sparse {
        dict: Dictionary,
        cfg: SparseSolverConfig,
        variant: SolverVariant,
    },
    Unet {
        model: UNetModel,
        stft_cfg: StftConfig,
    },
}

impl Engine {
    fn build(method: Method, opts: &RunOptions) -> Result<Engine, HarnessError> {
        match method {
            Method::Passthrough => Ok(Engine::Passthrough),
            Method::Iht | Method::ConsIht => {
                if opts.frame_len == 0 || opts.dict_atoms < opts.frame_len {
                    return Err(HarnessError::Config(format!(
                        "bad sparse configuration: frame {} atoms {}",
                        opts.frame_len, opts.dict_atoms
                    )));
                }
                Ok(Engine::Sparse {
                    dict: Dictionary::overcomplete_dct(opts.frame_len, opts.dict_atoms),
                    cfg: opts.solver.clone(),
                    variant: if method == Method::Iht {
                        SolverVariant::Iht
                    } else {
                        SolverVariant::ConsistentIht
                    },
                })
            }
            Method::Unet => {
                let path = opts.checkpoint.as_ref().ok_or_else(|| {
                    HarnessError::Config("the unet method needs a checkpoint".into())
                })?;
                let model = load_model(path, None)?;
                let stft_cfg = StftConfig::for_image_side(model.config.image_size)?;
                Ok(Engine::Unet { model, stft_cfg })
            }
        }
    }

    fn declip(&self, clipped: &Waveform, threshold: f64) -> Result<Waveform, HarnessError> {
        match self {
            Engine::Passthrough => Ok(clipped.clone()),
            Engine::Sparse { dict, cfg, variant } => {
                Ok(declip_signal(clipped, threshold, dict, cfg, *variant).waveform)
            }
            Engine::Unet { model, stft_cfg } => {
                let spec = stft(clipped, stft_cfg)?;
                let images = extract_images(&spec, true);
                let enhanced = enhance(model, &images)?;
                Ok(reconstruct(&enhanced, &spec)?)
            }
        }
    }
}

/// Runs one declipper over every test entry, writing estimates under
/// `run_dir/<method>/`. Per-file failures are reported and skipped.
pub fn run_declip(
    root: &Path,
    manifest: &DatasetManifest,
    method: Method,
    run_dir: &Path,
    opts: &RunOptions,
) -> Result<RunLog, HarnessError> {
    let engine = Engine::build(method, opts)?;
    let out_dir = run_dir.join(method.to_string());
    fs::create_dir_all(&out_dir)?;
    let mut log = RunLog {
        method,
        processed: 0,
        failures: Vec::new(),
    };
    for entry in manifest.entries_in(Split::Test) {
        let src = root.join(&entry.clipped_path);
        let name = entry
            .clipped_path
            .file_name()
            .ok_or_else(|| HarnessError::Data("manifest entry without a file name".into()))?;
        let dst = out_dir.join(name);
        let outcome = (|| -> Result<(), HarnessError> {
            if matches!(method, Method::Passthrough) {
                // Byte-for-byte copy; this row stands for the unprocessed
                // clipped signal.
                fs::copy(&src, &dst)?;
                return Ok(());
            }
            let clipped = restore_saturation(&read_wav(&src)?, entry.threshold);
            let estimate = engine.declip(&clipped, entry.threshold)?;
            write_wav(&dst, &estimate)?;
            Ok(())
        })();
        match outcome {
            Ok(()) => log.processed += 1,
            Err(e) => {
                eprintln!("declip failed for {}: {e}", src.display());
                log.failures
                    .push((entry.clipped_path.display().to_string(), e.to_string()));
            }
        }
    }
    Ok(log)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceScore {
    pub utterance_id: String,
    pub method: String,
    pub clip_sdr_db: f64,
    pub sdr_db: f64,
    pub llr: f64,
    pub estoi: f64,
}

#[derive(Debug)]
pub struct EvaluateOutcome {
    pub scores: Vec<UtteranceScore>,
    /// One table per metric: SDR, LLR, intelligibility.
    pub tables: Vec<ResultsTable>,
    /// Entries that had no processed file or failed to score.
    pub missing: Vec<String>,
}

fn scores_csv(scores: &[UtteranceScore], with_sigma: Option<&[f64]>) -> String {
    let mut out = String::from("utterance_id,method,clip_sdr_db");
    if with_sigma.is_some() {
        out.push_str(",noise_sigma2");
    }
    out.push_str(",sdr_db,llr,estoi\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{},{},{}", s.utterance_id, s.method, s.clip_sdr_db));
        if let Some(sigmas) = with_sigma {
            out.push_str(&format!(",{}", sigmas[i]));
        }
        out.push_str(&format!(",{},{},{}\n", s.sdr_db, s.llr, s.estoi));
    }
    out
}

const METRIC_SPECS: [(&str, bool); 3] =
    [("sdr_db", true), ("llr", false), ("estoi", true)];

fn metric_value(score: &UtteranceScore, metric: &str) -> f64 {
    match metric {
        "sdr_db" => score.sdr_db,
        "llr" => score.llr,
        "estoi" => score.estoi,
        _ => unreachable!("unknown metric"),
    }
}

/// `columns[i]` is the table column of `scores[i]`.
fn build_tables(
    scores: &[UtteranceScore],
    columns: &[usize],
    row_labels: &[String],
    column_labels: &[String],
) -> Vec<ResultsTable> {
    assert_eq!(scores.len(), columns.len());
    METRIC_SPECS
        .iter()
        .map(|&(metric, higher)| {
            let mut cells =
                vec![vec![Vec::new(); column_labels.len()]; row_labels.len()];
            for (s, &col) in scores.iter().zip(columns) {
                let row = row_labels
                    .iter()
                    .position(|m| *m == s.method)
                    .expect("scores only reference known rows");
                cells[row][col].push(metric_value(s, metric));
            }
            ResultsTable::aggregate(metric, higher, row_labels, column_labels, &cells)
        })
        .collect()
}

fn write_outcome_files(
    dir: &Path,
    scores_text: String,
    tables: &[ResultsTable],
) -> Result<(), HarnessError> {
    fs::write(dir.join("scores.csv"), scores_text)?;
    for table in tables {
        fs::write(dir.join(format!("table_{}.csv", table.metric)), table.to_csv())?;
        fs::write(dir.join(format!("table_{}.txt", table.metric)), table.to_text())?;
    }
    Ok(())
}

/// Scores every processed file found under `run_dir` against the clean
/// references and writes `scores.csv` plus per-metric tables into
/// `run_dir`. Methods are discovered from the subdirectory names.
pub fn evaluate_run(
    root: &Path,
    manifest: &DatasetManifest,
    run_dir: &Path,
) -> Result<EvaluateOutcome, HarnessError> {
    let mut methods: Vec<Method> = Vec::new();
    for method in Method::ALL {
        if run_dir.join(method.to_string()).is_dir() {
            methods.push(method);
        }
    }
    if methods.is_empty() {
        return Err(HarnessError::Data(format!(
            "no method directories under {}",
            run_dir.display()
        )));
    }

    let mut columns: Vec<f64> = manifest.test_grid_db.clone();
    columns.sort_by(f64::total_cmp);
    columns.dedup();
    let column_labels: Vec<String> = columns.iter().map(|c| format!("{c} dB")).collect();

    let mut clean_cache: BTreeMap<PathBuf, Waveform> = BTreeMap::new();
    let mut scores = Vec::new();
    let mut missing = Vec::new();
    for &method in &methods {
        for entry in manifest.entries_in(Split::Test) {
            let name = entry.clipped_path.file_name().unwrap_or_default();
            let processed_path = run_dir.join(method.to_string()).join(name);
            if !processed_path.is_file() {
                missing.push(format!("{}: no output", processed_path.display()));
                continue;
            }
            let clean = match clean_cache.get(&entry.clean_path) {
                Some(w) => w.clone(),
                None => {
                    let w = read_wav(&root.join(&entry.clean_path))?;
                    clean_cache.insert(entry.clean_path.clone(), w.clone());
                    w
                }
            };
            match read_wav(&processed_path).map_err(HarnessError::from).and_then(|w| {
                evaluate(&clean, &w).map_err(HarnessError::from)
            }) {
                Ok(report) => scores.push(UtteranceScore {
                    utterance_id: entry.utterance_id.clone(),
                    method: method.to_string(),
                    clip_sdr_db: entry.clip_sdr_target_db,
                    sdr_db: report.sdr_db,
                    llr: report.llr,
                    estoi: report.estoi,
                }),
                Err(e) => missing.push(format!("{}: {e}", processed_path.display())),
            }
        }
    }

    let row_labels: Vec<String> = methods.iter().map(Method::to_string).collect();
    let score_columns: Vec<usize> = scores
        .iter()
        .map(|s| {
            columns
                .iter()
                .position(|&c| c == s.clip_sdr_db)
                .expect("score severity comes from the grid")
        })
        .collect();
    let tables = build_tables(&scores, &score_columns, &row_labels, &column_labels);
    write_outcome_files(run_dir, scores_csv(&scores, None), &tables)?;
    Ok(EvaluateOutcome {
        scores,
        tables,
        missing,
    })
}

#[derive(Debug)]
pub struct SweepOutcome {
    /// `(noise variance, score)` per processed file.
    pub scores: Vec<(f64, UtteranceScore)>,
    /// One table per metric; columns are the noise variances.
    pub tables: Vec<ResultsTable>,
    pub missing: Vec<String>,
}

/// For each noise variance: adds Gaussian noise to the clean test
/// utterances, clips the noisy signal to 3.5 dB SDR, runs every method,
/// and scores the results against the original clean signals. With
/// variance 0 this reduces exactly to the plain 3.5 dB evaluation.
pub fn noise_sweep(
    root: &Path,
    manifest: &DatasetManifest,
    methods: &[Method],
    sigmas: &[f64],
    sweep_dir: &Path,
    opts: &RunOptions,
) -> Result<SweepOutcome, HarnessError> {
    if methods.is_empty() || sigmas.is_empty() {
        return Err(HarnessError::Config(
            "noise sweep needs at least one method and one variance".into(),
        ));
    }
    if sigmas.iter().any(|&s| s < 0.0 || !s.is_finite()) {
        return Err(HarnessError::Config("noise variances must be finite and >= 0".into()));
    }
    let engines: Vec<(Method, Engine)> = methods
        .iter()
        .map(|&m| Engine::build(m, opts).map(|e| (m, e)))
        .collect::<Result<_, _>>()?;

    // The clean file of each test utterance, in manifest order.
    let mut utterances: Vec<(String, PathBuf)> = Vec::new();
    for entry in manifest.entries_in(Split::Test) {
        if !utterances.iter().any(|(id, _)| *id == entry.utterance_id) {
            utterances.push((entry.utterance_id.clone(), entry.clean_path.clone()));
        }
    }
    if utterances.is_empty() {
        return Err(HarnessError::Data("manifest has no test utterances".into()));
    }

    let mut scores: Vec<(f64, UtteranceScore)> = Vec::new();
    let mut missing = Vec::new();
    for (si, &sigma2) in sigmas.iter().enumerate() {
        let sigma_dir = sweep_dir.join(format!("sigma_{sigma2}"));
        fs::create_dir_all(sigma_dir.join("clipped"))?;
        for (m, _) in &engines {
            fs::create_dir_all(sigma_dir.join(m.to_string()))?;
        }
        for (ui, (utt_id, clean_rel)) in utterances.iter().enumerate() {
            let clean = read_wav(&root.join(clean_rel))?;
            let noise_seed =
                manifest.seed ^ 0x6e6f_6973_6500u64 ^ ((si as u64) << 32) ^ ui as u64;
            let outcome = (|| -> Result<(), HarnessError> {
                let noisy = add_gaussian_noise(&clean, sigma2, noise_seed)?;
                let threshold = threshold_for_sdr(&noisy, SWEEP_CLIP_SDR_DB)?;
                let clipped_path = sigma_dir.join("clipped").join(format!("{utt_id}.wav"));
                write_wav(&clipped_path, &clip(&noisy, threshold))?;
                let clipped = read_wav(&clipped_path)?;
                for (method, engine) in &engines {
                    let estimate = if matches!(method, Method::Passthrough) {
                        clipped.clone()
                    } else {
                        engine.declip(&restore_saturation(&clipped, threshold), threshold)?
                    };
                    let out_path = sigma_dir.join(method.to_string()).join(format!("{utt_id}.wav"));
                    write_wav(&out_path, &estimate)?;
                    let report = evaluate(&clean, &read_wav(&out_path)?)?;
                    scores.push((
                        sigma2,
                        UtteranceScore {
                            utterance_id: utt_id.clone(),
                            method: method.to_string(),
                            clip_sdr_db: SWEEP_CLIP_SDR_DB,
                            sdr_db: report.sdr_db,
                            llr: report.llr,
                            estoi: report.estoi,
                        },
                    ));
                }
                Ok(())
            })();
            if let Err(e) = outcome {
                eprintln!("noise sweep failed for {utt_id} at variance {sigma2}: {e}");
                missing.push(format!("{utt_id} at variance {sigma2}: {e}"));
            }
        }
    }

    let row_labels: Vec<String> = engines.iter().map(|(m, _)| m.to_string()).collect();
    let column_labels: Vec<String> = sigmas.iter().map(|s| format!("{s}")).collect();
    let flat: Vec<UtteranceScore> = scores.iter().map(|(_, s)| s.clone()).collect();
    let sigma_of: Vec<f64> = scores.iter().map(|(s, _)| *s).collect();
    let score_columns: Vec<usize> = sigma_of
        .iter()
        .map(|s| sigmas.iter().position(|x| x == s).expect("sigma from the grid"))
        .collect();
    let tables = build_tables(&flat, &score_columns, &row_labels, &column_labels);
    fs::create_dir_all(sweep_dir)?;
    write_outcome_files(sweep_dir, scores_csv(&flat, Some(&sigma_of)), &tables)?;
    Ok(SweepOutcome {
        scores,
        tables,
        missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::prepare::{prepare_dataset, PrepareOptions};
    use crate::sparse::ClipMask;
    use crate::unet::{save_model, UNetConfig};
    use tempfile::tempdir;

    /// A dataset small enough for file-level checks: one test utterance
    /// clipped at each severity of `test_grid`.
    fn tiny_dataset(dir: &Path, test_grid: &[f64]) -> DatasetManifest {
        prepare_dataset(&PrepareOptions {
            out_dir: dir.to_path_buf(),
            synthetic_count: 4,
            synthetic_seconds: 1.0,
            train_grid_db: vec![5.0],
            test_grid_db: test_grid.to_vec(),
            seed: 11,
            ..PrepareOptions::default()
        })
        .unwrap()
    }

    fn small_sparse_options() -> RunOptions {
        RunOptions {
            frame_len: 64,
            dict_atoms: 128,
            solver: SparseSolverConfig {
                frame_shift: 32,
                max_iters_per_k: 8,
                k_cap: Some(8),
                ..SparseSolverConfig::default()
            },
            ..RunOptions::default()
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("vmethod".parse::<Method>().is_err());
    }

    #[test]
    fn saturation_restore_snaps_only_near_threshold_samples() {
        let theta = 0.31;
        let step = 1.0 / I16_SCALE;
        let x = Waveform::new(
            vec![0.0, theta - 0.5 * step, -theta + 0.5 * step, theta - 3.0 * step, 0.2],
            16_000,
        );
        let r = restore_saturation(&x, theta);
        assert_eq!(r.samples[0], 0.0);
        assert_eq!(r.samples[1], theta);
        assert_eq!(r.samples[2], -theta);
        assert_eq!(r.samples[3], theta - 3.0 * step);
        assert_eq!(r.samples[4], 0.2);
    }

    #[test]
    fn passthrough_copies_the_clipped_files_byte_for_byte() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), &[3.5]);
        let run_dir = dir.path().join("run");
        let log = run_declip(
            dir.path(),
            &manifest,
            Method::Passthrough,
            &run_dir,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(log.processed, 1);
        assert!(log.failures.is_empty());
        let entry = manifest.entries_in(Split::Test).next().unwrap();
        let src = fs::read(dir.path().join(&entry.clipped_path)).unwrap();
        let name = entry.clipped_path.file_name().unwrap();
        let dst = fs::read(run_dir.join("passthrough").join(name)).unwrap();
        assert_eq!(src, dst);
    }

    #[test]
    fn consistent_solver_files_respect_the_observation_constraints() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), &[3.5]);
        let run_dir = dir.path().join("run");
        let log = run_declip(
            dir.path(),
            &manifest,
            Method::ConsIht,
            &run_dir,
            &small_sparse_options(),
        )
        .unwrap();
        assert_eq!(log.processed, 1);
        let entry = manifest.entries_in(Split::Test).next().unwrap();
        let clipped = read_wav(&dir.path().join(&entry.clipped_path)).unwrap();
        let restored = restore_saturation(&clipped, entry.threshold);
        let name = entry.clipped_path.file_name().unwrap();
        let out = read_wav(&run_dir.join("cons-iht").join(name)).unwrap();

        // The constraints hold exactly in memory; writing the estimate as
        // 16-bit PCM moves each sample by at most half a quantization step.
        let slack = 0.5 / I16_SCALE + 1e-9;
        let mask = ClipMask::from_samples(&restored.samples, entry.threshold);
        let mut saturated = 0usize;
        for i in 0..out.len() {
            match mask.labels[i] {
                crate::sparse::SampleLabel::Reliable => {
                    assert_eq!(out.samples[i], restored.samples[i], "sample {i}")
                }
                crate::sparse::SampleLabel::ClippedPositive => {
                    saturated += 1;
                    assert!(out.samples[i] >= entry.threshold - slack, "sample {i}")
                }
                crate::sparse::SampleLabel::ClippedNegative => {
                    saturated += 1;
                    assert!(out.samples[i] <= -entry.threshold + slack, "sample {i}")
                }
            }
        }
        assert!(saturated > 0, "a 3.5 dB clip must saturate samples");
    }

    #[test]
    fn network_method_needs_a_checkpoint_and_runs_from_one() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), &[3.5]);
        let run_dir = dir.path().join("run");
        let err = run_declip(
            dir.path(),
            &manifest,
            Method::Unet,
            &run_dir,
            &RunOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));

        let model = UNetModel::new(UNetConfig::desk(), 99).unwrap();
        let ckpt = dir.path().join("model.ckpt");
        save_model(&model, &ckpt).unwrap();
        let opts = RunOptions {
            checkpoint: Some(ckpt),
            ..RunOptions::default()
        };
        let log = run_declip(dir.path(), &manifest, Method::Unet, &run_dir, &opts).unwrap();
        assert_eq!(log.processed, 1);
        assert!(log.failures.is_empty());
        let entry = manifest.entries_in(Split::Test).next().unwrap();
        let name = entry.clipped_path.file_name().unwrap();
        let out = read_wav(&run_dir.join("unet").join(name)).unwrap();
        let clipped = read_wav(&dir.path().join(&entry.clipped_path)).unwrap();
        assert_eq!(out.len(), clipped.len());
    }

    #[test]
    fn evaluation_writes_deterministic_scores_and_tables() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), &[3.5, 12.5]);
        let run_dir = dir.path().join("run");
        run_declip(
            dir.path(),
            &manifest,
            Method::Passthrough,
            &run_dir,
            &RunOptions::default(),
        )
        .unwrap();

        let first = evaluate_run(dir.path(), &manifest, &run_dir).unwrap();
        assert!(first.missing.is_empty());
        assert_eq!(first.scores.len(), 2);
        assert_eq!(first.tables.len(), 3);
        let table = &first.tables[0];
        assert_eq!(table.metric, "sdr_db");
        assert_eq!(table.column_labels, vec!["3.5 dB", "12.5 dB"]);
        assert_eq!(table.rows.len(), 1);
        // Severity 3.5 dB distorts more than 12.5 dB.
        assert!(table.rows[0].cells[0].unwrap() < table.rows[0].cells[1].unwrap());

        let csv_a = fs::read(run_dir.join("scores.csv")).unwrap();
        let second = evaluate_run(dir.path(), &manifest, &run_dir).unwrap();
        let csv_b = fs::read(run_dir.join("scores.csv")).unwrap();
        assert_eq!(csv_a, csv_b);
        assert_eq!(first.scores, second.scores);
        for metric in ["sdr_db", "llr", "estoi"] {
            assert!(run_dir.join(format!("table_{metric}.csv")).is_file());
            assert!(run_dir.join(format!("table_{metric}.txt")).is_file());
        }
    }

    #[test]
    fn evaluation_reports_entries_without_outputs() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), &[3.5, 12.5]);
        let run_dir = dir.path().join("run");
        fs::create_dir_all(run_dir.join("passthrough")).unwrap();
        let outcome = evaluate_run(dir.path(), &manifest, &run_dir).unwrap();
        assert!(outcome.scores.is_empty());
        assert_eq!(outcome.missing.len(), 2);
    }

    #[test]
    fn zero_variance_sweep_matches_the_plain_evaluation_exactly() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), &[3.5]);
        let run_dir = dir.path().join("run");
        let opts = RunOptions::default();
        run_declip(dir.path(), &manifest, Method::Passthrough, &run_dir, &opts).unwrap();
        let plain = evaluate_run(dir.path(), &manifest, &run_dir).unwrap();

        let sweep = noise_sweep(
            dir.path(),
            &manifest,
            &[Method::Passthrough],
            &[0.0],
            &dir.path().join("sweep"),
            &opts,
        )
        .unwrap();
        assert!(sweep.missing.is_empty());
        assert_eq!(sweep.scores.len(), plain.scores.len());
        for ((sigma, got), want) in sweep.scores.iter().zip(&plain.scores) {
            assert_eq!(*sigma, 0.0);
            assert_eq!(got.utterance_id, want.utterance_id);
            assert_eq!(got.sdr_db, want.sdr_db);
            assert_eq!(got.llr, want.llr);
            assert_eq!(got.estoi, want.estoi);
        }
    }

    #[test]
    fn sweep_rejects_bad_variances() {
        let dir = tempdir().unwrap();
        let manifest = tiny_dataset(dir.path(), &[3.5]);
        let err = noise_sweep(
            dir.path(),
            &manifest,
            &[Method::Passthrough],
            &[-1.0],
            &dir.path().join("sweep"),
            &RunOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }
}
