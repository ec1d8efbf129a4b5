//! Binary checkpoint format.
//!
//! ```text
//! "DFC1" | JSON header | '\n' | parameters as little-endian f64 | CRC-32
//! ```
//!
//! Parameters are concatenated in manifest order. The trailing CRC-32
//! (IEEE, little-endian) covers every byte between the magic and itself.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Architecture, LayerManifest, Model, TrainingContext, Widths};
use crate::data::Scaler;
use crate::error::{CheckpointError, Error, Result};

pub const MAGIC: &[u8; 4] = b"DFC1";
pub const VERSION: u32 = 1;
pub const SUPPORTED_VERSIONS: &[u32] = &[VERSION];

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    architecture: Architecture,
    window: usize,
    width_scale: f64,
    widths: Widths,
    seed: u64,
    scaler: Option<Scaler>,
    context: Option<TrainingContext>,
    layers: Vec<LayerManifest>,
}

/// Minimal view used to read the version before trusting the rest.
#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

pub fn encode(model: &Model) -> Result<Vec<u8>> {
    let header = Header {
        version: VERSION,
        architecture: model.architecture,
        window: model.window,
        width_scale: model.width_scale,
        widths: model.widths,
        seed: model.seed,
        scaler: model.scaler,
        context: model.context.clone(),
        layers: model.manifest(),
    };
    let mut bytes = MAGIC.to_vec();
    serde_json::to_writer(&mut bytes, &header)?;
    bytes.push(b'\n');
    for t in model.parameters() {
        for v in t.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&bytes[MAGIC.len()..]);
    bytes.extend_from_slice(&crc.to_le_bytes());
    Ok(bytes)
}

pub fn decode(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(CheckpointError::BadMagic.into());
    }
    let body = &bytes[MAGIC.len()..];
    let newline = body.iter().position(|&b| b == b'\n').ok_or(CheckpointError::Truncated {
        expected: bytes.len() + 1,
        found: bytes.len(),
    })?;
    let header_bytes = &body[..newline];

    let probe: VersionProbe = serde_json::from_slice(header_bytes)
        .map_err(|e| CheckpointError::Header(e.to_string()))?;
    if !SUPPORTED_VERSIONS.contains(&probe.version) {
        return Err(CheckpointError::UnsupportedVersion {
            found: probe.version,
            supported: SUPPORTED_VERSIONS.to_vec(),
        }
        .into());
    }
    let header: Header = serde_json::from_slice(header_bytes)
        .map_err(|e| CheckpointError::Header(e.to_string()))?;

    let mut model = Model::zeroed(header.architecture, header.window, header.widths)
        .map_err(|e| CheckpointError::Header(e.to_string()))?;
    if model.manifest() != header.layers {
        return Err(CheckpointError::Header(
            "layer manifest does not match the architecture".into(),
        )
        .into());
    }

    let n_values = model.parameter_count();
    let payload_start = MAGIC.len() + newline + 1;
    let expected = payload_start + 8 * n_values + 4;
    if bytes.len() < expected {
        return Err(CheckpointError::Truncated {
            expected,
            found: bytes.len(),
        }
        .into());
    }
    if bytes.len() > expected {
        return Err(CheckpointError::Header(format!(
            "{} trailing bytes after checksum",
            bytes.len() - expected
        ))
        .into());
    }
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(&bytes[MAGIC.len()..expected - 4]);
    if stored != computed {
        return Err(CheckpointError::Checksum { stored, computed }.into());
    }

    let mut chunks = bytes[payload_start..expected - 4].chunks_exact(8);
    for t in model.parameters_mut() {
        for v in t.data_mut() {
            let chunk = chunks.next().expect("length checked above");
            *v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        }
    }
    model.set_seed(header.seed);
    model.set_width_scale(header.width_scale);
    if let Some(s) = header.scaler {
        model.set_scaler(s);
    }
    if let Some(c) = header.context {
        model.set_context(c);
    }
    Ok(model)
}

/// Writes the checkpoint atomically: a temporary file in the target
/// directory is renamed into place once fully written.
pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(model)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_proposed, predict};

    fn sample() -> Model {
        let mut m = build_proposed(8, 0.05, 11).unwrap();
        m.set_scaler(Scaler::new(2900.0, 3700.0).unwrap());
        m
    }

    fn rewrite_header(bytes: &[u8], edit: impl Fn(&mut serde_json::Value)) -> Vec<u8> {
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        let mut header: serde_json::Value = serde_json::from_slice(&bytes[4..nl]).unwrap();
        edit(&mut header);
        let mut out = MAGIC.to_vec();
        serde_json::to_writer(&mut out, &header).unwrap();
        out.extend_from_slice(&bytes[nl..bytes.len() - 4]);
        let crc = crc32fast::hash(&out[4..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = sample();
        let back = decode(&encode(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let w: Vec<f64> = (0..8).map(|i| i as f64 * 0.1).collect();
        assert_eq!(predict(&m, &w).unwrap().to_bits(), predict(&back, &w).unwrap().to_bits());
    }

    #[test]
    fn header_starts_after_magic() {
        let bytes = encode(&sample()).unwrap();
        assert_eq!(&bytes[..4], b"DFC1");
        assert_eq!(bytes[4], b'{');
    }

    #[test]
    fn corrupted_payload_fails_checksum() {
        let mut bytes = encode(&sample()).unwrap();
        let n = bytes.len();
        bytes[n - 20] ^= 0x40;
        assert!(matches!(
            decode(&bytes),
            Err(Error::Checkpoint(CheckpointError::Checksum { .. }))
        ));
        let mut bytes = encode(&sample()).unwrap();
        let n = bytes.len();
        bytes[n - 1] ^= 0x01;
        assert!(matches!(
            decode(&bytes),
            Err(Error::Checkpoint(CheckpointError::Checksum { .. }))
        ));
    }

    #[test]
    fn wrong_version_names_supported_versions() {
        let bytes = rewrite_header(&encode(&sample()).unwrap(), |h| h["version"] = 99.into());
        match decode(&bytes) {
            Err(Error::Checkpoint(CheckpointError::UnsupportedVersion { found, supported })) => {
                assert_eq!(found, 99);
                assert_eq!(supported, vec![1]);
            }
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_truncation() {
        let bytes = encode(&sample()).unwrap();
        assert!(matches!(
            decode(b"XXXX{}"),
            Err(Error::Checkpoint(CheckpointError::BadMagic))
        ));
        assert!(matches!(
            decode(&bytes[..bytes.len() - 9]),
            Err(Error::Checkpoint(CheckpointError::Truncated { .. }))
        ));
        assert!(matches!(
            decode(&bytes[..10]),
            Err(Error::Checkpoint(CheckpointError::Truncated { .. }))
        ));
    }

    #[test]
    fn manifest_mismatch_rejected() {
        let bytes = rewrite_header(&encode(&sample()).unwrap(), |h| {
            h["architecture"] = "cnn_bilstm".into()
        });
        assert!(matches!(
            decode(&bytes),
            Err(Error::Checkpoint(CheckpointError::Header(_)))
        ));
    }
}
