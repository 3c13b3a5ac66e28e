//! Trains a small network through the harness and declips with it.
//!
//! This is the image domain counterpart of `full_pipeline`: prepare a
//! dataset, train on the train split, write a checkpoint, then run the
//! network method over the test split and score it. The configuration
//! is shrunk so the example finishes in well under a minute, which means
//! the barely trained network still loses to the passthrough baseline;
//! the point here is the plumbing, not the scores. Artifacts land under
//! `target/example_out/network_pipeline`. Run with:
//!
//! ```text
//! cargo run --release --example network_pipeline
//! ```

use std::path::PathBuf;

use declip::harness::{
    evaluate_run, prepare_dataset, run_declip, train_command, Method, PrepareOptions, RunOptions,
    TrainCommandOptions,
};
use declip::unet::{TrainConfig, UNetConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../target/example_out/network_pipeline");
    let dataset = root.join("dataset");
    let run_dir = root.join("run");

    let opts = PrepareOptions {
        out_dir: dataset.clone(),
        corpus_dir: None,
        synthetic_count: 5,
        synthetic_seconds: 1.0,
        sample_rate: 16_000,
        train_grid_db: vec![1.5, 4.5],
        test_grid_db: vec![1.5, 7.5],
        seed: 2,
    };
    let manifest = prepare_dataset(&opts)?;

    let train_opts = TrainCommandOptions {
        unet: UNetConfig {
            depth: 2,
            base_filters: 4,
            image_size: 64,
        },
        train: TrainConfig {
            epochs: 2,
            batch_size: 5,
            learning_rate: 2e-4,
            seed: 0,
        },
        model_seed: 0,
        checkpoint_path: root.join("model.ckpt"),
        loss_csv_path: root.join("loss.csv"),
    };
    let (model, report) = train_command(&dataset, &manifest, &train_opts)?;
    println!(
        "trained {} parameters, loss {:.4} -> {:.4}",
        model.parameter_count(),
        report.epoch_losses.first().unwrap(),
        report.epoch_losses.last().unwrap()
    );

    let run_opts = RunOptions {
        checkpoint: Some(train_opts.checkpoint_path.clone()),
        ..Default::default()
    };
    for method in [Method::Passthrough, Method::Unet] {
        let log = run_declip(&dataset, &manifest, method, &run_dir, &run_opts)?;
        println!("{method} processed {} test files", log.processed);
    }

    let outcome = evaluate_run(&dataset, &manifest, &run_dir)?;
    for table in &outcome.tables {
        println!();
        println!("{}", table.to_text());
    }
    Ok(())
}
