//! Log magnitude spectrogram export for visual inspection (PGM) or
//! numeric dumps (CSV).

use std::fs;
use std::path::Path;

use crate::signal::image::write_pgm_gray;
use crate::signal::{read_wav, stft, StftConfig, MAG_FLOOR};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrogramFormat {
    /// 8-bit grayscale image, min-max scaled; time runs left to right,
    /// frequency bottom to top.
    Pgm,
    /// Raw natural-log magnitudes, one row per frame, one column per
    /// bin; values reload exactly.
    Csv,
}

impl std::str::FromStr for SpectrogramFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pgm" => Ok(SpectrogramFormat::Pgm),
            "csv" => Ok(SpectrogramFormat::Csv),
            other => Err(format!("unknown format '{other}' (expected pgm or csv)")),
        }
    }
}

/// Renders the log magnitude spectrogram of a WAV file.
pub fn export_spectrogram(
    wav_path: &Path,
    out_path: &Path,
    format: SpectrogramFormat,
    config: &StftConfig,
) -> Result<(), HarnessError> {
    let wave = read_wav(wav_path)?;
    let spec = stft(&wave, config)?;
    let bins = config.bins();
    let frames = spec.num_frames();
    let log_mag: Vec<Vec<f64>> = spec
        .frames
        .iter()
        .map(|f| f.iter().map(|c| c.norm().max(MAG_FLOOR).ln()).collect())
        .collect();

    match format {
        SpectrogramFormat::Pgm => {
            // Rows top to bottom are bins high to low, columns are frames.
            let mut pixels = vec![0.0; bins * frames];
            for (t, frame) in log_mag.iter().enumerate() {
                for (f, &v) in frame.iter().enumerate() {
                    pixels[(bins - 1 - f) * frames + t] = v;
                }
            }
            let comment = format!(
                "log magnitude spectrogram of {}; columns = frames (hop {} samples), rows = bins {} (top) down to 0, bin spacing {} Hz",
                wav_path.display(),
                config.frame_shift,
                bins - 1,
                wave.sample_rate as f64 / config.fft_size as f64
            );
            write_pgm_gray(out_path, frames, bins, &comment, &pixels)?;
        }
        SpectrogramFormat::Csv => {
            let mut out = format!(
                "# natural-log magnitudes of {}; row t = frame t (hop {} samples), column f = bin f ({} Hz each), floor ln({MAG_FLOOR:e})\n",
                wav_path.display(),
                config.frame_shift,
                wave.sample_rate as f64 / config.fft_size as f64
            );
            for frame in &log_mag {
                let cells: Vec<String> = frame.iter().map(|v| format!("{v}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            fs::write(out_path, out)?;
        }
    }
    Ok(())
}

/// Reads back a CSV spectrogram dump as frame rows.
pub fn read_spectrogram_csv(path: &Path) -> Result<Vec<Vec<f64>>, HarnessError> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| HarnessError::Data(format!("bad CSV value: {e}")))?);
    }
    Ok(rows)
}
