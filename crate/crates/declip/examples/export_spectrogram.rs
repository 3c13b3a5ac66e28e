//! Renders spectrograms of a clean and a clipped utterance.
//!
//! The PGM output is a grayscale picture (time left to right, frequency
//! bottom to top); the CSV output holds the raw log magnitudes for
//! exact reloading. Clipping shows up as extra harmonic energy smeared
//! across the high bins. Files land under
//! `target/example_out/spectrograms`. Run with:
//!
//! ```text
//! cargo run --release --example export_spectrogram
//! ```

use std::path::PathBuf;

use declip::harness::{export_spectrogram, synth_utterance, SpectrogramFormat};
use declip::signal::{clip, threshold_for_sdr, write_wav, StftConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../target/example_out/spectrograms");
    std::fs::create_dir_all(&out_dir)?;

    let clean = synth_utterance(5, 16_000, 2.0);
    let theta = threshold_for_sdr(&clean, 1.5)?;
    let clipped = clip(&clean, theta);

    let clean_wav = out_dir.join("clean.wav");
    let clipped_wav = out_dir.join("clipped.wav");
    write_wav(&clean_wav, &clean)?;
    write_wav(&clipped_wav, &clipped)?;

    let config = StftConfig::new(512, 128, 512)?;
    for (wav, stem) in [(&clean_wav, "clean"), (&clipped_wav, "clipped")] {
        let pgm = out_dir.join(format!("{stem}.pgm"));
        let csv = out_dir.join(format!("{stem}.csv"));
        export_spectrogram(wav, &pgm, SpectrogramFormat::Pgm, &config)?;
        export_spectrogram(wav, &csv, SpectrogramFormat::Csv, &config)?;
        println!("wrote {} and {}", pgm.display(), csv.display());
    }

    println!();
    println!("Open the PGM files in any image viewer to compare them.");
    Ok(())
}
