//! Binary checkpoint format for trained networks.
//!
//! Layout: magic `UNET`, format version, the three config integers,
//! then every layer's weights and biases as little-endian f64 in the
//! fixed topology order, and a trailing CRC32 over everything before it.

use std::fs;
use std::path::Path;

use super::model::{UNetConfig, UNetModel};
use super::UnetError;

const MAGIC: &[u8; 4] = b"UNET";
const VERSION: u32 = 1;

/// CRC32 (IEEE polynomial, bit-reflected) of the payload.
fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = 0xffff_ffffu32;
    for &b in bytes {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xedb8_8320 & mask);
        }
    }
    !crc
}

pub fn save_model(model: &UNetModel, path: &Path) -> Result<(), UnetError> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(model.config.depth as u32).to_le_bytes());
    bytes.extend_from_slice(&(model.config.base_filters as u32).to_le_bytes());
    bytes.extend_from_slice(&(model.config.image_size as u32).to_le_bytes());
    model.visit_layers(&mut |layer| {
        for &w in &layer.weights {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        for &b in &layer.bias {
            bytes.extend_from_slice(&b.to_le_bytes());
        }
    });
    let crc = crc32(&bytes);
    bytes.extend_from_slice(&crc.to_le_bytes());
    fs::write(path, bytes)?;
    Ok(())
}

/// Loads a checkpoint. When `expected` is given, the stored configuration
/// must match it exactly.
pub fn load_model(path: &Path, expected: Option<UNetConfig>) -> Result<UNetModel, UnetError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 4 + 4 + 12 + 4 {
        return Err(UnetError::Corrupt("file too short".into()));
    }
    let (payload, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    if crc32(payload) != stored_crc {
        return Err(UnetError::Corrupt("checksum mismatch".into()));
    }
    if &payload[..4] != MAGIC {
        return Err(UnetError::Corrupt("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(payload[i..i + 4].try_into().unwrap());
    if word(4) != VERSION {
        return Err(UnetError::Corrupt(format!(
            "unsupported format version {}",
            word(4)
        )));
    }
    let config = UNetConfig {
        depth: word(8) as usize,
        base_filters: word(12) as usize,
        image_size: word(16) as usize,
    };
    config
        .validate()
        .map_err(|e| UnetError::Corrupt(format!("stored config invalid: {e}")))?;
    if let Some(exp) = expected {
        if config != exp {
            return Err(UnetError::ConfigMismatch(format!(
                "stored {config:?}, expected {exp:?}"
            )));
        }
    }

    let mut model = UNetModel::new(config, 0)?;
    let mut offset = 20usize;
    let mut short = false;
    model.visit_layers_mut(&mut |layer| {
        for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            if offset + 8 > payload.len() {
                short = true;
                return;
            }
            *w = f64::from_le_bytes(payload[offset..offset + 8].try_into().unwrap());
            offset += 8;
        }
    });
    if short || offset != payload.len() {
        return Err(UnetError::Corrupt(format!(
            "parameter payload is {} bytes, expected {}",
            payload.len() - 20,
            model.parameter_count() * 8
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn small_config() -> UNetConfig {
        UNetConfig {
            depth: 2,
            base_filters: 2,
            image_size: 8,
        }
    }

    #[test]
    fn crc_matches_known_vector() {
        // The classic check value for this polynomial.
        assert_eq!(crc32(b"123456789"), 0xcbf4_3926);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.unet");
        let model = UNetModel::new(small_config(), 42).unwrap();
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path, Some(small_config())).unwrap();
        let mut wa = Vec::new();
        model.visit_layers(&mut |l| {
            wa.extend_from_slice(&l.weights);
            wa.extend_from_slice(&l.bias);
        });
        let mut wb = Vec::new();
        loaded.visit_layers(&mut |l| {
            wb.extend_from_slice(&l.weights);
            wb.extend_from_slice(&l.bias);
        });
        assert_eq!(wa, wb);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.unet");
        let model = UNetModel::new(small_config(), 1).unwrap();
        save_model(&model, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            load_model(&path, None),
            Err(UnetError::Corrupt(_))
        ));
    }

    #[test]
    fn flipped_bit_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.unet");
        let model = UNetModel::new(small_config(), 1).unwrap();
        save_model(&model, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x10;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            load_model(&path, None),
            Err(UnetError::Corrupt(_))
        ));
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.unet");
        let model = UNetModel::new(small_config(), 1).unwrap();
        save_model(&model, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        // Refresh the checksum so the magic check itself is exercised.
        let crc = crc32(&bytes[..bytes.len() - 4]);
        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&crc.to_le_bytes());
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            load_model(&path, None),
            Err(UnetError::Corrupt(_))
        ));
    }

    #[test]
    fn config_mismatch_is_reported() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.unet");
        let model = UNetModel::new(small_config(), 1).unwrap();
        save_model(&model, &path).unwrap();
        let other = UNetConfig {
            depth: 3,
            base_filters: 2,
            image_size: 16,
        };
        assert!(matches!(
            load_model(&path, Some(other)),
            Err(UnetError::ConfigMismatch(_))
        ));
    }
}
