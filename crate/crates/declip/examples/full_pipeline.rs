//! Runs the whole harness in one process: prepare, declip, evaluate.
//!
//! A small synthetic dataset is written to disk, the consistent sparse
//! solver processes the test split, and the evaluation step prints the
//! per-metric tables that the CLI would produce. Artifacts land under
//! `target/example_out/full_pipeline`. Run with:
//!
//! ```text
//! cargo run --release --example full_pipeline
//! ```

use std::path::PathBuf;

use declip::harness::{
    evaluate_run, prepare_dataset, run_declip, Method, PrepareOptions, RunOptions,
};
use declip::sparse::SparseSolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../target/example_out/full_pipeline");
    let dataset = root.join("dataset");
    let run_dir = root.join("run");

    let opts = PrepareOptions {
        out_dir: dataset.clone(),
        corpus_dir: None,
        synthetic_count: 6,
        synthetic_seconds: 1.0,
        sample_rate: 16_000,
        train_grid_db: vec![1.0, 5.0],
        test_grid_db: vec![3.5, 12.5],
        seed: 9,
    };
    let manifest = prepare_dataset(&opts)?;
    println!(
        "prepared {} clipped files under {}",
        manifest.entries.len(),
        dataset.display()
    );

    let run_opts = RunOptions {
        checkpoint: None,
        frame_len: 256,
        dict_atoms: 512,
        solver: SparseSolverConfig {
            frame_shift: 64,
            max_iters_per_k: 20,
            k_cap: Some(16),
            tolerance: 1e-6,
        },
    };
    for method in [Method::Passthrough, Method::ConsIht] {
        let log = run_declip(&dataset, &manifest, method, &run_dir, &run_opts)?;
        println!(
            "{}: processed {} files, {} failures",
            log.method,
            log.processed,
            log.failures.len()
        );
    }

    let outcome = evaluate_run(&dataset, &manifest, &run_dir)?;
    for table in &outcome.tables {
        println!();
        println!("{}", table.to_text());
    }
    println!("scores.csv and the table files are in {}", run_dir.display());
    Ok(())
}
