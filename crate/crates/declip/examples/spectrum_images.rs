//! Converts a clipped waveform into log magnitude spectrum images and
//! back.
//!
//! The network consumes square images cut from the STFT magnitude; phase
//! and the top frequency bin are kept aside and reused at synthesis time.
//! Rebuilding from untouched images recovers the clipped waveform almost
//! exactly, which is the identity the enhancement path relies on. Run
//! with:
//!
//! ```text
//! cargo run --release --example spectrum_images
//! ```

use declip::harness::synth_utterance;
use declip::signal::{
    clip, extract_images, reconstruct, sdr_db, stft, threshold_for_sdr, StftConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clean = synth_utterance(3, 16_000, 2.0);
    let theta = threshold_for_sdr(&clean, 3.5)?;
    let clipped = clip(&clean, theta);

    let config = StftConfig::for_image_side(64)?;
    let spec = stft(&clipped, &config)?;

    // Normalized images are what the network trains on; raw ones keep
    // the scale needed for reconstruction.
    let normalized = extract_images(&spec, true);
    let raw = extract_images(&spec, false);

    println!(
        "{} frames -> {} images of {}x{} pixels",
        spec.num_frames(),
        raw.len(),
        raw[0].side,
        raw[0].side
    );
    for img in &normalized {
        println!(
            "  segment {}: {} valid rows, mean {:+.3}, std {:.3}",
            img.segment_index, img.valid_frames, img.norm_mean, img.norm_std
        );
    }

    let rebuilt = reconstruct(&raw, &spec)?;
    let err = sdr_db(&clipped, &rebuilt)?;
    println!();
    println!("identity reconstruction SDR vs the clipped input: {err:.1} dB");
    println!("(300 dB is the reporting cap, meaning the error is at noise level)");
    Ok(())
}
