//! Versioned binary model checkpoints.
//!
//! Layout (little-endian throughout):
//!   magic  b"AQEC"
//!   u32    format version (currently 1)
//!   u64    model version counter
//!   u32    architecture JSON length, followed by that many JSON bytes
//!   u64    parameter count, followed by that many f64 values

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Architecture, EncoderModel};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AQEC";
const FORMAT_VERSION: u32 = 1;

pub fn save(model: &EncoderModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&model.version.to_le_bytes())?;
    let arch = serde_json::to_vec(&model.architecture)?;
    w.write_all(&(arch.len() as u32).to_le_bytes())?;
    w.write_all(&arch)?;
    w.write_all(&(model.params.len() as u64).to_le_bytes())?;
    for p in &model.params {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<EncoderModel> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::MalformedCheckpoint("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::MalformedCheckpoint("bad magic".into()));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)
        .map_err(|_| Error::MalformedCheckpoint("truncated header".into()))?;
    let format = u32::from_le_bytes(buf4);
    if format != FORMAT_VERSION {
        return Err(Error::MalformedCheckpoint(format!(
            "unsupported format version {format}"
        )));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)
        .map_err(|_| Error::MalformedCheckpoint("truncated header".into()))?;
    let version = u64::from_le_bytes(buf8);

    r.read_exact(&mut buf4)
        .map_err(|_| Error::MalformedCheckpoint("truncated architecture".into()))?;
    let arch_len = u32::from_le_bytes(buf4) as usize;
    if arch_len > 1 << 20 {
        return Err(Error::MalformedCheckpoint(
            "architecture block implausibly large".into(),
        ));
    }
    let mut arch_buf = vec![0u8; arch_len];
    r.read_exact(&mut arch_buf)
        .map_err(|_| Error::MalformedCheckpoint("truncated architecture".into()))?;
    let architecture: Architecture = serde_json::from_slice(&arch_buf)
        .map_err(|e| Error::MalformedCheckpoint(format!("architecture json: {e}")))?;

    r.read_exact(&mut buf8)
        .map_err(|_| Error::MalformedCheckpoint("truncated parameters".into()))?;
    let count = u64::from_le_bytes(buf8) as usize;
    if count != architecture.param_count() {
        return Err(Error::MalformedCheckpoint(format!(
            "parameter count {} does not match architecture ({})",
            count,
            architecture.param_count()
        )));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf8)
            .map_err(|_| Error::MalformedCheckpoint("truncated parameters".into()))?;
        params.push(f64::from_le_bytes(buf8));
    }
    Ok(EncoderModel {
        architecture,
        params,
        version,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn sample_model() -> EncoderModel {
        let mut m = EncoderModel::init(
            Architecture::Lstm {
                input_rows: 5,
                input_cols: 3,
                hidden: 4,
                latent: 2,
            },
            &mut RngStream::new(0, 0).rng(),
        );
        m.version = 7;
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let model = sample_model();
        save(&model, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded, model);
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        std::fs::write(&path, b"NOPE0000000000000000").unwrap();
        assert!(matches!(
            load(&path),
            Err(Error::MalformedCheckpoint(_))
        ));
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save(&sample_model(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(
            load(&path),
            Err(Error::MalformedCheckpoint(_))
        ));
    }

    #[test]
    fn param_count_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let mut model = sample_model();
        save(&model, &path).unwrap();
        // Rewrite with an inconsistent parameter count in the body.
        model.params.pop();
        let mut bytes = std::fs::read(&path).unwrap();
        let arch_len = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as usize;
        let count_off = 20 + arch_len;
        let bad = (model.params.len() as u64).to_le_bytes();
        bytes[count_off..count_off + 8].copy_from_slice(&bad);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load(&path),
            Err(Error::MalformedCheckpoint(_))
        ));
    }
}
