//! Log-magnitude spectrum images: the square spectrogram tiles consumed
//! and produced by the U-Net.
//!
//! A spectrogram with `fft_size/2 + 1` bins turns into images of side
//! `fft_size/2`: the highest bin is dropped and the frames are cut into
//! consecutive non-overlapping segments of `side` frames. The tail
//! segment is padded with the log floor and remembers how many of its
//! rows are real via `valid_frames`. Magnitudes pass through
//! `ln(max(|S|, 1e-8))`.
//!
//! Per-utterance mean/variance normalization is applied to clipped inputs
//! only; clean training targets and network outputs stay on the raw
//! log-magnitude scale.

use std::fs;
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stft::ComplexSpectrogram;
use super::{istft, SignalError, Waveform};

/// Magnitudes below this floor are clamped before taking the logarithm.
pub const MAG_FLOOR: f64 = 1e-8;

/// One square log-magnitude tile. Pixels are stored row-major with time
/// as the row index and frequency as the column index, so
/// `pixels[t * side + f]` is frame `t`, bin `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogMagImage {
    pub pixels: Vec<f64>,
    pub side: usize,
    /// Rows below this index hold real frames; the rest is padding.
    pub valid_frames: usize,
    /// Position of this segment within the utterance.
    pub segment_index: usize,
    pub norm_mean: f64,
    pub norm_std: f64,
}

impl LogMagImage {
    pub fn pixel(&self, t: usize, f: usize) -> f64 {
        self.pixels[t * self.side + f]
    }
}

/// Cuts a spectrogram into log-magnitude images.
///
/// With `normalize` set, the mean and standard deviation are computed
/// over every real frame-bin of the whole utterance (padding excluded),
/// applied to all pixels and stored in each image; otherwise the stored
/// stats are the identity (0, 1).
pub fn extract_images(spec: &ComplexSpectrogram, normalize: bool) -> Vec<LogMagImage> {
    let side = spec.config.fft_size / 2;
    let num_frames = spec.num_frames();
    let floor = MAG_FLOOR.ln();

    let mut rows: Vec<Vec<f64>> = spec
        .frames
        .iter()
        .map(|frame| {
            (0..side)
                .map(|f| frame[f].norm().max(MAG_FLOOR).ln())
                .collect()
        })
        .collect();

    let (mean, std) = if normalize {
        let n = (num_frames * side) as f64;
        let mean = rows.iter().flatten().sum::<f64>() / n;
        let var = rows
            .iter()
            .flatten()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n;
        // A perfectly constant spectrogram has no scale to normalize away;
        // fall back to unit deviation so the stored std stays positive.
        let std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        for row in &mut rows {
            for v in row.iter_mut() {
                *v = (*v - mean) / std;
            }
        }
        (mean, std)
    } else {
        (0.0, 1.0)
    };

    let num_images = num_frames.div_ceil(side).max(1);
    let mut images = Vec::with_capacity(num_images);
    for seg in 0..num_images {
        let start = seg * side;
        let valid = (num_frames - start).min(side);
        let mut pixels = vec![floor; side * side];
        for t in 0..valid {
            pixels[t * side..(t + 1) * side].copy_from_slice(&rows[start + t]);
        }
        images.push(LogMagImage {
            pixels,
            side,
            valid_frames: valid,
            segment_index: seg,
            norm_mean: mean,
            norm_std: std,
        });
    }
    images
}

/// Rebuilds a waveform from enhanced log-magnitude images and the clipped
/// signal's spectrogram.
///
/// The images supply magnitudes for all but the highest bin, which is
/// copied from the clipped spectrogram; phases come from the clipped
/// spectrogram throughout. The images must tile the spectrogram exactly.
pub fn reconstruct(
    images: &[LogMagImage],
    clipped: &ComplexSpectrogram,
) -> Result<Waveform, SignalError> {
    let side = clipped.config.fft_size / 2;
    let covered: usize = images.iter().map(|im| im.valid_frames).sum();
    if covered != clipped.num_frames() || images.iter().any(|im| im.side != side) {
        return Err(SignalError::FrameCountMismatch(
            covered,
            clipped.num_frames(),
        ));
    }

    let mut frames = Vec::with_capacity(clipped.num_frames());
    let mut t_global = 0usize;
    for image in images {
        for t in 0..image.valid_frames {
            let clipped_frame = &clipped.frames[t_global];
            let mut frame = Vec::with_capacity(side + 1);
            for f in 0..side {
                let mag = image.pixel(t, f).exp();
                let phase = clipped_frame[f].arg();
                frame.push(Complex64::from_polar(mag, phase));
            }
            frame.push(clipped_frame[side]);
            frames.push(frame);
            t_global += 1;
        }
    }

    istft(&ComplexSpectrogram {
        frames,
        config: clipped.config,
        sample_rate: clipped.sample_rate,
        original_length: clipped.original_length,
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct ImageSidecar {
    side: usize,
    valid_frames: usize,
    segment_index: usize,
    norm_mean: f64,
    norm_std: f64,
}

/// Writes the raw pixels as little-endian f64 with a JSON sidecar
/// (`<path>.json`) describing dimensions and normalization stats.
pub fn write_image_binary(image: &LogMagImage, path: &Path) -> Result<(), SignalError> {
    let mut bytes = Vec::with_capacity(image.pixels.len() * 8);
    for &v in &image.pixels {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let sidecar = ImageSidecar {
        side: image.side,
        valid_frames: image.valid_frames,
        segment_index: image.segment_index,
        norm_mean: image.norm_mean,
        norm_std: image.norm_std,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

/// Reads an image back from [`write_image_binary`] output.
pub fn read_image_binary(path: &Path) -> Result<LogMagImage, SignalError> {
    let json = fs::read_to_string(sidecar_path(path))?;
    let sidecar: ImageSidecar = serde_json::from_str(&json)
        .map_err(|e| SignalError::MalformedImage(format!("bad sidecar: {e}")))?;
    let bytes = fs::read(path)?;
    if bytes.len() != sidecar.side * sidecar.side * 8 {
        return Err(SignalError::MalformedImage(format!(
            "image payload is {} bytes, expected {}",
            bytes.len(),
            sidecar.side * sidecar.side * 8
        )));
    }
    let pixels = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(LogMagImage {
        pixels,
        side: sidecar.side,
        valid_frames: sidecar.valid_frames,
        segment_index: sidecar.segment_index,
        norm_mean: sidecar.norm_mean,
        norm_std: sidecar.norm_std,
    })
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    os.into()
}

/// Renders the image to an 8-bit PGM, min-max scaled, for eyeballing.
/// Rows run from the highest frequency bin down to bin 0 so the picture
/// reads like a spectrogram; columns are frames in time order.
pub fn write_image_pgm(image: &LogMagImage, path: &Path) -> Result<(), SignalError> {
    let side = image.side;
    let mut rows = Vec::with_capacity(side * side);
    for f in (0..side).rev() {
        for t in 0..side {
            rows.push(image.pixel(t, f));
        }
    }
    write_pgm_gray(
        path,
        side,
        side,
        "rows: frequency bins (top = highest); columns: time frames",
        &rows,
    )
}

/// Shared 8-bit binary PGM writer with min-max scaling.
pub(crate) fn write_pgm_gray(
    path: &Path,
    width: usize,
    height: usize,
    comment: &str,
    pixels_row_major: &[f64],
) -> Result<(), SignalError> {
    assert_eq!(pixels_row_major.len(), width * height);
    let lo = pixels_row_major.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = pixels_row_major
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n# {comment}\n{width} {height}\n255\n").into_bytes();
    out.extend(
        pixels_row_major
            .iter()
            .map(|&v| (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8),
    );
    fs::write(path, out)?;
    Ok(())
}
