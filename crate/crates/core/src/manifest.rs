//! JSON sidecars recording how each artifact was produced.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileHash>,
    /// SHA-256 of the effective run configuration (JSON).
    pub config_sha256: String,
    pub artifact: Option<FileHash>,
}

impl Manifest {
    pub fn new(command: &str, args: Vec<String>, config_json: &str) -> Self {
        Manifest {
            tool: "metacode".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            config_sha256: sha256_hex(config_json.as_bytes()),
            artifact: None,
        }
    }

    pub fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.into(), value);
        self
    }

    pub fn input(mut self, path: &Path) -> Result<Self> {
        self.inputs.push(FileHash {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(self)
    }

    pub fn sidecar_path(artifact: &Path) -> PathBuf {
        let mut name = artifact.as_os_str().to_owned();
        name.push(MANIFEST_SUFFIX);
        PathBuf::from(name)
    }
}

fn create_new(path: &Path) -> Result<std::fs::File> {
    OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::AlreadyExists => Error::ArtifactExists(path.to_path_buf()),
            _ => Error::Io(e),
        })
}

/// Writes `bytes` to a new file at `path` plus its manifest sidecar. Neither
/// file may already exist.
pub fn write_artifact(path: &Path, bytes: &[u8], manifest: &Manifest) -> Result<()> {
    let sidecar = Manifest::sidecar_path(path);
    for p in [path, sidecar.as_path()] {
        if p.exists() {
            return Err(Error::ArtifactExists(p.to_path_buf()));
        }
    }
    create_new(path)?.write_all(bytes)?;
    record(path, manifest)
}

/// Writes the sidecar for an artifact that is already on disk.
pub fn record(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut m = manifest.clone();
    m.artifact = Some(FileHash {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    });
    let json = serde_json::to_string_pretty(&m)?;
    create_new(&Manifest::sidecar_path(path))?.write_all(json.as_bytes())?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(Manifest::sidecar_path(path))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sidecar_written_once() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, b"abc").unwrap();
        let m = Manifest::new("gen", vec!["--n".into(), "5".into()], "{}")
            .seed("dataset", 1)
            .input(&input)
            .unwrap();
        let out = dir.path().join("a.bin");
        write_artifact(&out, b"xyz", &m).unwrap();
        let back = load(&out).unwrap();
        assert_eq!(back.seeds["dataset"], 1);
        assert_eq!(back.inputs[0].sha256, sha256_hex(b"abc"));
        assert_eq!(back.artifact.unwrap().sha256, sha256_hex(b"xyz"));
        assert!(matches!(write_artifact(&out, b"new", &m), Err(Error::ArtifactExists(_))));
        assert_eq!(std::fs::read(&out).unwrap(), b"xyz");
        assert!(matches!(
            m.clone().input(&dir.path().join("missing")),
            Err(Error::MissingArtifact(_))
        ));
    }
}
