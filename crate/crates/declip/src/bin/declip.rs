//! Command line front end for the declipping laboratory.
//!
//! Every subcommand is a thin wrapper over the library: `prepare` builds
//! a clipped dataset, `train` fits the network declipper, `declip` runs
//! a method over the test split, `evaluate` scores a run into tables,
//! `noise-sweep` repeats the 3.5 dB experiment under additive noise, and
//! `spectrogram` exports log-magnitude images.
//!
//! A JSON file passed with `--config` supplies default values per
//! subcommand; explicit flags override it. Exit codes: 0 success,
//! 1 configuration error, 2 data or I/O error, 3 completed with
//! per-file failures (details on stderr).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use declip::harness::{
    evaluate_run, export_spectrogram, noise_sweep, prepare_dataset, run_declip, train_command,
    DatasetManifest, HarnessError, Method, PrepareOptions, RunOptions, SpectrogramFormat,
    TrainCommandOptions,
};
use declip::sparse::SparseSolverConfig;
use declip::signal::StftConfig;
use declip::unet::{TrainConfig, UNetConfig};

#[derive(Parser)]
#[command(
    name = "declip",
    version,
    about = "Speech declipping laboratory: dataset preparation, declippers, metrics"
)]
struct Cli {
    /// JSON file with per-subcommand default values; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a clipped dataset (synthetic corpus or a directory of WAVs).
    Prepare(PrepareArgs),
    /// Train the network declipper on a prepared dataset.
    Train(TrainArgs),
    /// Run one declipping method over the test split.
    Declip(DeclipArgs),
    /// Score a run directory into per-metric tables.
    Evaluate(EvaluateArgs),
    /// Re-run the 3.5 dB experiment under additive Gaussian noise.
    NoiseSweep(NoiseSweepArgs),
    /// Export a log-magnitude spectrogram as PGM or CSV.
    Spectrogram(SpectrogramArgs),
}

/// Per-subcommand sections of the `--config` file. Unknown keys are
/// rejected so typos surface as configuration errors.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    prepare: Option<PrepareArgs>,
    train: Option<TrainArgs>,
    declip: Option<DeclipArgs>,
    evaluate: Option<EvaluateArgs>,
    noise_sweep: Option<NoiseSweepArgs>,
    spectrogram: Option<SpectrogramArgs>,
}

/// Takes the flag value when given, else the config-file value.
fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PrepareArgs {
    /// Dataset directory to create [default: dataset].
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Directory of clean mono 16-bit WAVs; omit to synthesize.
    #[arg(long, value_name = "DIR")]
    corpus: Option<PathBuf>,
    /// Number of synthetic utterances when no corpus is given [default: 10].
    #[arg(long, value_name = "N")]
    synthetic: Option<usize>,
    /// Length of each synthetic utterance in seconds [default: 1].
    #[arg(long, value_name = "SECS")]
    seconds: Option<f64>,
    /// Sample rate of synthetic utterances [default: 16000].
    #[arg(long, value_name = "HZ")]
    sample_rate: Option<u32>,
    /// Clipping SDR grid for the train split [default: 1,2,5,10,15,20].
    #[arg(long, value_name = "DB,..", value_delimiter = ',')]
    train_grid: Option<Vec<f64>>,
    /// Clipping SDR grid for the dev and test splits
    /// [default: 0.5,1.5,3.5,7.5,12.5,17.5].
    #[arg(long, value_name = "DB,..", value_delimiter = ',')]
    test_grid: Option<Vec<f64>>,
    /// Seed for splits and synthesis [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TrainArgs {
    /// Prepared dataset directory [default: dataset].
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Where to write the trained model [default: model.ckpt].
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// Where to write the per-epoch loss curve [default: loss.csv].
    #[arg(long, value_name = "FILE")]
    loss_csv: Option<PathBuf>,
    /// Network depth (encoder levels) [default: 4].
    #[arg(long)]
    depth: Option<usize>,
    /// Channels of the first encoder level [default: 64].
    #[arg(long)]
    base_filters: Option<usize>,
    /// Square input image side in frames/bins [default: 256].
    #[arg(long)]
    image_size: Option<usize>,
    /// Training epochs [default: 50].
    #[arg(long)]
    epochs: Option<usize>,
    /// Images per optimizer step [default: 5].
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate [default: 0.0002].
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Seed for batch shuffling [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Seed for weight initialization [default: 0].
    #[arg(long)]
    model_seed: Option<u64>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DeclipArgs {
    /// Prepared dataset directory [default: dataset].
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Output directory for processed WAVs [default: run].
    #[arg(long, value_name = "DIR")]
    run_dir: Option<PathBuf>,
    /// passthrough, iht, cons-iht or unet.
    #[arg(long)]
    method: Option<String>,
    /// Trained model for the unet method.
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// Analysis frame length of the sparse methods [default: 512].
    #[arg(long)]
    frame_len: Option<usize>,
    /// Dictionary atom count of the sparse methods [default: 1024].
    #[arg(long)]
    dict_atoms: Option<usize>,
    /// Hop between sparse analysis frames [default: 128].
    #[arg(long)]
    frame_shift: Option<usize>,
    /// Iteration budget per sparsity level [default: 50].
    #[arg(long)]
    max_iters_per_k: Option<usize>,
    /// Largest sparsity level [default: an eighth of the frame length].
    #[arg(long)]
    k_cap: Option<usize>,
    /// Relative residual declared converged [default: 1e-9].
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EvaluateArgs {
    /// Prepared dataset directory [default: dataset].
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Run directory holding method subdirectories [default: run].
    #[arg(long, value_name = "DIR")]
    run_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NoiseSweepArgs {
    /// Prepared dataset directory [default: dataset].
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Output directory of the sweep [default: sweep].
    #[arg(long, value_name = "DIR")]
    sweep_dir: Option<PathBuf>,
    /// Methods to run [default: passthrough,iht,cons-iht].
    #[arg(long, value_name = "M,..", value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Noise variances [default: 0,0.001,0.005,0.01,0.05,0.1].
    #[arg(long, value_name = "VAR,..", value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    /// Trained model for the unet method.
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// Analysis frame length of the sparse methods [default: 512].
    #[arg(long)]
    frame_len: Option<usize>,
    /// Dictionary atom count of the sparse methods [default: 1024].
    #[arg(long)]
    dict_atoms: Option<usize>,
    /// Hop between sparse analysis frames [default: 128].
    #[arg(long)]
    frame_shift: Option<usize>,
    /// Iteration budget per sparsity level [default: 50].
    #[arg(long)]
    max_iters_per_k: Option<usize>,
    /// Largest sparsity level [default: an eighth of the frame length].
    #[arg(long)]
    k_cap: Option<usize>,
    /// Relative residual declared converged [default: 1e-9].
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SpectrogramArgs {
    /// Input WAV.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output file (.pgm or .csv).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// pgm or csv [default: pgm].
    #[arg(long)]
    format: Option<String>,
    /// Analysis frame length in samples [default: 512].
    #[arg(long)]
    frame_len: Option<usize>,
    /// Hop between frames in samples [default: 128].
    #[arg(long)]
    frame_shift: Option<usize>,
    /// Fourier transform size [default: 512].
    #[arg(long)]
    fft_size: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let file = match load_file_config(cli.config.as_deref()) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Prepare(a) => cmd_prepare(a, file.prepare.unwrap_or_default()),
        Command::Train(a) => cmd_train(a, file.train.unwrap_or_default()),
        Command::Declip(a) => cmd_declip(a, file.declip.unwrap_or_default()),
        Command::Evaluate(a) => cmd_evaluate(a, file.evaluate.unwrap_or_default()),
        Command::NoiseSweep(a) => cmd_noise_sweep(a, file.noise_sweep.unwrap_or_default()),
        Command::Spectrogram(a) => cmd_spectrogram(a, file.spectrogram.unwrap_or_default()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            match e {
                HarnessError::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_file_config(path: Option<&std::path::Path>) -> Result<FileConfig, HarnessError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| {
        HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        HarnessError::Config(format!("bad config {}: {e}", path.display()))
    })
}

fn cmd_prepare(flag: PrepareArgs, file: PrepareArgs) -> Result<u8, HarnessError> {
    let defaults = PrepareOptions::default();
    let opts = PrepareOptions {
        out_dir: pick(flag.out_dir, file.out_dir).unwrap_or(defaults.out_dir),
        corpus_dir: pick(flag.corpus, file.corpus),
        synthetic_count: pick(flag.synthetic, file.synthetic)
            .unwrap_or(defaults.synthetic_count),
        synthetic_seconds: pick(flag.seconds, file.seconds)
            .unwrap_or(defaults.synthetic_seconds),
        sample_rate: pick(flag.sample_rate, file.sample_rate).unwrap_or(defaults.sample_rate),
        train_grid_db: pick(flag.train_grid, file.train_grid)
            .unwrap_or(defaults.train_grid_db),
        test_grid_db: pick(flag.test_grid, file.test_grid).unwrap_or(defaults.test_grid_db),
        seed: pick(flag.seed, file.seed).unwrap_or(defaults.seed),
    };
    let manifest = prepare_dataset(&opts)?;
    println!(
        "prepared {} entries over {} utterances in {}",
        manifest.entries.len(),
        manifest.num_utterances,
        opts.out_dir.display()
    );
    Ok(0)
}

fn cmd_train(flag: TrainArgs, file: TrainArgs) -> Result<u8, HarnessError> {
    let dataset = pick(flag.dataset, file.dataset).unwrap_or_else(|| PathBuf::from("dataset"));
    let unet_defaults = UNetConfig::default();
    let train_defaults = TrainConfig::default();
    let opts = TrainCommandOptions {
        unet: UNetConfig {
            depth: pick(flag.depth, file.depth).unwrap_or(unet_defaults.depth),
            base_filters: pick(flag.base_filters, file.base_filters)
                .unwrap_or(unet_defaults.base_filters),
            image_size: pick(flag.image_size, file.image_size)
                .unwrap_or(unet_defaults.image_size),
        },
        train: TrainConfig {
            epochs: pick(flag.epochs, file.epochs).unwrap_or(train_defaults.epochs),
            batch_size: pick(flag.batch_size, file.batch_size)
                .unwrap_or(train_defaults.batch_size),
            learning_rate: pick(flag.learning_rate, file.learning_rate)
                .unwrap_or(train_defaults.learning_rate),
            seed: pick(flag.seed, file.seed).unwrap_or(train_defaults.seed),
        },
        model_seed: pick(flag.model_seed, file.model_seed).unwrap_or(0),
        checkpoint_path: pick(flag.checkpoint, file.checkpoint)
            .unwrap_or_else(|| PathBuf::from("model.ckpt")),
        loss_csv_path: pick(flag.loss_csv, file.loss_csv)
            .unwrap_or_else(|| PathBuf::from("loss.csv")),
    };
    let manifest = DatasetManifest::load(&dataset)?;
    let (model, report) = train_command(&dataset, &manifest, &opts)?;
    println!(
        "trained {} parameters for {} epochs, final loss {:.6}",
        model.parameter_count(),
        report.epoch_losses.len(),
        report.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    println!("checkpoint: {}", opts.checkpoint_path.display());
    Ok(0)
}

fn sparse_options(
    checkpoint: Option<PathBuf>,
    frame_len: Option<usize>,
    dict_atoms: Option<usize>,
    frame_shift: Option<usize>,
    max_iters_per_k: Option<usize>,
    k_cap: Option<usize>,
    tolerance: Option<f64>,
) -> RunOptions {
    let defaults = RunOptions::default();
    let solver_defaults = SparseSolverConfig::default();
    RunOptions {
        checkpoint,
        frame_len: frame_len.unwrap_or(defaults.frame_len),
        dict_atoms: dict_atoms.unwrap_or(defaults.dict_atoms),
        solver: SparseSolverConfig {
            frame_shift: frame_shift.unwrap_or(solver_defaults.frame_shift),
            max_iters_per_k: max_iters_per_k.unwrap_or(solver_defaults.max_iters_per_k),
            k_cap: k_cap.or(solver_defaults.k_cap),
            tolerance: tolerance.unwrap_or(solver_defaults.tolerance),
        },
    }
}

fn cmd_declip(flag: DeclipArgs, file: DeclipArgs) -> Result<u8, HarnessError> {
    let dataset = pick(flag.dataset, file.dataset).unwrap_or_else(|| PathBuf::from("dataset"));
    let run_dir = pick(flag.run_dir, file.run_dir).unwrap_or_else(|| PathBuf::from("run"));
    let method: Method = pick(flag.method, file.method)
        .ok_or_else(|| HarnessError::Config("declip needs --method".into()))?
        .parse()
        .map_err(HarnessError::Config)?;
    let opts = sparse_options(
        pick(flag.checkpoint, file.checkpoint),
        pick(flag.frame_len, file.frame_len),
        pick(flag.dict_atoms, file.dict_atoms),
        pick(flag.frame_shift, file.frame_shift),
        pick(flag.max_iters_per_k, file.max_iters_per_k),
        pick(flag.k_cap, file.k_cap),
        pick(flag.tolerance, file.tolerance),
    );
    let manifest = DatasetManifest::load(&dataset)?;
    let log = run_declip(&dataset, &manifest, method, &run_dir, &opts)?;
    println!(
        "{}: {} files processed into {}",
        log.method,
        log.processed,
        run_dir.display()
    );
    if log.failures.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} files failed", log.failures.len());
        Ok(3)
    }
}

fn cmd_evaluate(flag: EvaluateArgs, file: EvaluateArgs) -> Result<u8, HarnessError> {
    let dataset = pick(flag.dataset, file.dataset).unwrap_or_else(|| PathBuf::from("dataset"));
    let run_dir = pick(flag.run_dir, file.run_dir).unwrap_or_else(|| PathBuf::from("run"));
    let manifest = DatasetManifest::load(&dataset)?;
    let outcome = evaluate_run(&dataset, &manifest, &run_dir)?;
    for table in &outcome.tables {
        print!("{}", table.to_text());
        println!();
    }
    println!("wrote scores.csv and tables to {}", run_dir.display());
    if outcome.missing.is_empty() {
        Ok(0)
    } else {
        for m in &outcome.missing {
            eprintln!("missing: {m}");
        }
        Ok(3)
    }
}

fn cmd_noise_sweep(flag: NoiseSweepArgs, file: NoiseSweepArgs) -> Result<u8, HarnessError> {
    let dataset = pick(flag.dataset, file.dataset).unwrap_or_else(|| PathBuf::from("dataset"));
    let sweep_dir = pick(flag.sweep_dir, file.sweep_dir).unwrap_or_else(|| PathBuf::from("sweep"));
    let methods: Vec<Method> = pick(flag.methods, file.methods)
        .unwrap_or_else(|| {
            vec!["passthrough".into(), "iht".into(), "cons-iht".into()]
        })
        .iter()
        .map(|m| m.parse().map_err(HarnessError::Config))
        .collect::<Result<_, _>>()?;
    let sigmas = pick(flag.sigmas, file.sigmas)
        .unwrap_or_else(|| vec![0.0, 0.001, 0.005, 0.01, 0.05, 0.1]);
    let opts = sparse_options(
        pick(flag.checkpoint, file.checkpoint),
        pick(flag.frame_len, file.frame_len),
        pick(flag.dict_atoms, file.dict_atoms),
        pick(flag.frame_shift, file.frame_shift),
        pick(flag.max_iters_per_k, file.max_iters_per_k),
        pick(flag.k_cap, file.k_cap),
        pick(flag.tolerance, file.tolerance),
    );
    let manifest = DatasetManifest::load(&dataset)?;
    let outcome = noise_sweep(&dataset, &manifest, &methods, &sigmas, &sweep_dir, &opts)?;
    for table in &outcome.tables {
        print!("{}", table.to_text());
        println!();
    }
    println!("wrote sweep results to {}", sweep_dir.display());
    if outcome.missing.is_empty() {
        Ok(0)
    } else {
        for m in &outcome.missing {
            eprintln!("missing: {m}");
        }
        Ok(3)
    }
}

fn cmd_spectrogram(flag: SpectrogramArgs, file: SpectrogramArgs) -> Result<u8, HarnessError> {
    let input = pick(flag.input, file.input)
        .ok_or_else(|| HarnessError::Config("spectrogram needs --input".into()))?;
    let out = pick(flag.out, file.out)
        .ok_or_else(|| HarnessError::Config("spectrogram needs --out".into()))?;
    let format: SpectrogramFormat = pick(flag.format, file.format)
        .unwrap_or_else(|| "pgm".into())
        .parse()
        .map_err(HarnessError::Config)?;
    let defaults = StftConfig::default();
    let config = StftConfig {
        frame_len: pick(flag.frame_len, file.frame_len).unwrap_or(defaults.frame_len),
        frame_shift: pick(flag.frame_shift, file.frame_shift).unwrap_or(defaults.frame_shift),
        fft_size: pick(flag.fft_size, file.fft_size).unwrap_or(defaults.fft_size),
    };
    export_spectrogram(&input, &out, format, &config)?;
    println!("wrote {}", out.display());
    Ok(0)
}
