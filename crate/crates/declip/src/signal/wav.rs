//! Minimal WAV I/O: 16-bit PCM, mono, little-endian RIFF. Anything else
//! is rejected rather than converted.

use std::fs;
use std::path::Path;

use super::{SignalError, Waveform};

pub const I16_SCALE: f64 = 32768.0;

/// Reads a mono 16-bit PCM WAV file into normalized f64 samples.
///
/// Samples are mapped to `[-1, 1)` by dividing by 32768. Multi-channel
/// files, non-PCM encodings and other bit depths produce
/// [`SignalError::UnsupportedWav`]; structural problems produce
/// [`SignalError::MalformedWav`].
pub fn read_wav(path: &Path) -> Result<Waveform, SignalError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(SignalError::MalformedWav(
            "missing RIFF/WAVE header".into(),
        ));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start + size;
        if body_end > bytes.len() {
            return Err(SignalError::MalformedWav(format!(
                "chunk {:?} overruns the file",
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(SignalError::MalformedWav("fmt chunk too short".into()));
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }

    let (format, channels, sample_rate, bits) =
        fmt.ok_or_else(|| SignalError::MalformedWav("no fmt chunk".into()))?;
    if format != 1 {
        return Err(SignalError::UnsupportedWav(format!(
            "audio format {format}, only PCM (1) is supported"
        )));
    }
    if channels != 1 {
        return Err(SignalError::UnsupportedWav(format!(
            "{channels} channels, only mono is supported"
        )));
    }
    if bits != 16 {
        return Err(SignalError::UnsupportedWav(format!(
            "{bits}-bit samples, only 16-bit is supported"
        )));
    }
    if sample_rate == 0 {
        return Err(SignalError::MalformedWav("zero sample rate".into()));
    }
    let data = data.ok_or_else(|| SignalError::MalformedWav("no data chunk".into()))?;
    if data.len() % 2 != 0 {
        return Err(SignalError::MalformedWav(
            "data chunk has an odd byte count".into(),
        ));
    }

    let samples = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes(c.try_into().unwrap()) as f64 / I16_SCALE)
        .collect();
    Ok(Waveform::new(samples, sample_rate))
}

/// Writes a mono 16-bit PCM WAV file.
///
/// Samples are clamped to `[-1, 1]` before quantization, so a read-back
/// differs from the written waveform by at most `2^-15` per sample.
pub fn write_wav(path: &Path, x: &Waveform) -> Result<(), SignalError> {
    let data_len = x.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&x.sample_rate.to_le_bytes());
    out.extend_from_slice(&(x.sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &x.samples {
        let q = (s.clamp(-1.0, 1.0) * I16_SCALE).round();
        let q = q.clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_samples_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let x = Waveform::new(
            (0..2000)
                .map(|t| ((t as f64) * 0.01).sin() * 0.97)
                .chain([1.0, -1.0, 0.0])
                .collect(),
            16000,
        );
        write_wav(&path, &x).unwrap();
        let y = read_wav(&path).unwrap();
        assert_eq!(y.sample_rate, 16000);
        assert_eq!(y.len(), x.len());
        let max_err = x
            .samples
            .iter()
            .zip(&y.samples)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err <= 1.0 / 32768.0, "max error {max_err}");
    }

    #[test]
    fn file_size_matches_header_arithmetic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let x = Waveform::new(vec![0.25; 1000], 8000);
        write_wav(&path, &x).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 44 + 2 * 1000);
    }

    #[test]
    fn out_of_range_samples_are_clamped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let x = Waveform::new(vec![2.0, -3.0], 16000);
        write_wav(&path, &x).unwrap();
        let y = read_wav(&path).unwrap();
        assert!((y.samples[0] - 32767.0 / 32768.0).abs() < 1e-12);
        assert!((y.samples[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stereo_is_rejected_as_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let x = Waveform::new(vec![0.0; 10], 16000);
        write_wav(&path, &x).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[22] = 2; // channel count lives at offset 22
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_wav(&path),
            Err(SignalError::UnsupportedWav(_))
        ));
    }

    #[test]
    fn truncated_and_garbage_files_are_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        std::fs::write(&path, b"not a wav at all").unwrap();
        assert!(matches!(read_wav(&path), Err(SignalError::MalformedWav(_))));

        let good = dir.path().join("g.wav");
        write_wav(&good, &Waveform::new(vec![0.5; 100], 16000)).unwrap();
        let bytes = std::fs::read(&good).unwrap();
        std::fs::write(&path, &bytes[..60]).unwrap();
        assert!(matches!(read_wav(&path), Err(SignalError::MalformedWav(_))));
    }
}
