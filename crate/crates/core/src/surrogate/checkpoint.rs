//! `METACODE-SURROGATE {json}\n` followed by every layer's weights then bias
//! as little-endian `f64`, input layer first.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dense, SurrogateArch, SurrogateModel, TrainingMeta};
use crate::{Error, Result};

const MAGIC: &str = "METACODE-SURROGATE";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    arch: SurrogateArch,
    meta: TrainingMeta,
}

impl SurrogateModel {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            version: VERSION,
            arch: self.arch.clone(),
            meta: self.meta.clone(),
        };
        writeln!(w, "{MAGIC} {}", serde_json::to_string(&header)?)?;
        let mut buf = Vec::new();
        for l in &self.layers {
            for v in l.weights.iter().chain(&l.bias) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Refuses to replace an existing file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let f = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(path)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => Error::ArtifactExists(path.to_path_buf()),
                _ => Error::Io(e),
            })?;
        self.write_to(BufWriter::new(f))
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let nl = bytes
            .iter()
            .position(|b| *b == b'\n')
            .ok_or_else(|| Error::format("surrogate", "missing header line"))?;
        let line = std::str::from_utf8(&bytes[..nl])
            .map_err(|_| Error::format("surrogate", "header is not UTF-8"))?;
        let json = line
            .strip_prefix(MAGIC)
            .and_then(|s| s.strip_prefix(' '))
            .ok_or_else(|| Error::format("surrogate", "bad magic"))?;
        let header: Header = serde_json::from_str(json)?;
        if header.version != VERSION {
            return Err(Error::format("surrogate", format!("unsupported version {}", header.version)));
        }
        header.arch.validate()?;
        let body = &bytes[nl + 1..];
        let expected = header.arch.parameter_count() * 8;
        if body.len() != expected {
            return Err(Error::format(
                "surrogate",
                format!("expected {expected} weight bytes, found {}", body.len()),
            ));
        }
        let mut vals = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
        let layers = header
            .arch
            .layer_shapes()
            .into_iter()
            .map(|(n_in, n_out)| Dense {
                n_in,
                n_out,
                weights: vals.by_ref().take(n_in * n_out).collect(),
                bias: vals.by_ref().take(n_out).collect(),
            })
            .collect();
        let model = SurrogateModel {
            arch: header.arch,
            layers,
            meta: header.meta,
        };
        if !model.is_finite() {
            return Err(Error::format("surrogate", "non-finite weight"));
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::read_from(BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::init_model;

    #[test]
    fn round_trip_bytes() {
        let mut m = init_model(&SurrogateArch::new(vec![8, 4]).unwrap(), 5).unwrap();
        m.meta.val_mae = Some(0.25);
        m.meta.dataset_fingerprint = Some("abc".into());
        let back = SurrogateModel::read_from(&m.to_bytes()[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_truncated_and_trailing() {
        let m = init_model(&SurrogateArch::new(vec![4]).unwrap(), 5).unwrap();
        let b = m.to_bytes();
        assert!(SurrogateModel::read_from(&b[..b.len() - 1]).is_err());
        let mut extra = b.clone();
        extra.push(0);
        assert!(SurrogateModel::read_from(&extra[..]).is_err());
        assert!(SurrogateModel::read_from(&b"METACODE-DATASET {}\n"[..]).is_err());
    }

    #[test]
    fn save_refuses_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        let m = init_model(&SurrogateArch::new(vec![4]).unwrap(), 5).unwrap();
        m.save(&p).unwrap();
        assert!(matches!(m.save(&p), Err(Error::ArtifactExists(_))));
        assert_eq!(SurrogateModel::load(&p).unwrap(), m);
        assert!(matches!(
            SurrogateModel::load(&dir.path().join("none")),
            Err(Error::MissingArtifact(_))
        ));
    }
}
