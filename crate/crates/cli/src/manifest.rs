//! Output directory writer. Every artifact goes through [`ArtifactWriter`],
//! which hashes it and records it in `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub master_seed: u64,
    /// Derived seeds in the order they were used, with what they drove.
    pub seeds: Vec<(String, u64)>,
    pub files: Vec<Entry>,
}

pub struct ArtifactWriter {
    dir: PathBuf,
    manifest: Manifest,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

impl ArtifactWriter {
    pub fn create(dir: &Path, kind: &str, master_seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                kind: kind.to_string(),
                master_seed,
                seeds: Vec::new(),
                files: Vec::new(),
            },
        })
    }

    pub fn record_seed(&mut self, label: impl Into<String>, seed: u64) {
        self.manifest.seeds.push((label.into(), seed));
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>, description: &str) -> Result<(), CliError> {
        let data = contents.as_ref();
        if self.manifest.files.iter().any(|e| e.path == name) {
            return Err(CliError::Config(format!("artifact `{name}` written twice")));
        }
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(CliError::io(&path))?;
        self.manifest.files.push(Entry {
            path: name.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len(),
            description: description.to_string(),
        });
        Ok(())
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(self) -> Result<Manifest, CliError> {
        let path = self.dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(CliError::io(&path))?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn entries_hash_the_written_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::create(dir.path(), "test", 7).unwrap();
        w.record_seed("member 0", 11);
        w.write("a.txt", "hello", "greeting").unwrap();
        assert!(w.write("a.txt", "again", "dup").is_err());
        let m = w.finish().unwrap();
        assert_eq!(m.files.len(), 1);
        let on_disk = fs::read(dir.path().join("a.txt")).unwrap();
        assert_eq!(m.files[0].sha256, sha256_hex(&on_disk));
        assert!(dir.path().join(MANIFEST_NAME).exists());
    }
}
