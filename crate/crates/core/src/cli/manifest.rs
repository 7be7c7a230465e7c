//! Run manifest embedded in every report.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    /// SHA-256 over the options and the bytes of every input.
    pub config_hash: String,
    /// Seed driving the run's randomness; absent for deterministic
    /// subcommands run without `--seed`.
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    /// `# key: value` lines placed ahead of a CSV or field file.
    pub fn preamble(&self) -> String {
        let mut out = format!("# qpack-lab {} {}\n", self.version, self.subcommand);
        out.push_str(&format!("# config_sha256: {}\n", self.config_hash));
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        for input in &self.inputs {
            out.push_str(&format!("# input: {input}\n"));
        }
        out.push_str(&format!("# timestamp: {}\n", self.timestamp));
        out
    }

    pub fn embed_csv(&self, csv: &str) -> String {
        self.preamble() + csv
    }

    /// `{"manifest": …, "report": …}`, pretty-printed with a trailing newline.
    pub fn embed_json(&self, report: serde_json::Value) -> Result<String> {
        let doc = serde_json::json!({ "manifest": self, "report": report });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

/// Accumulates the config hash while inputs and options are read.
#[derive(Debug, Clone)]
pub struct ManifestBuilder {
    subcommand: String,
    hasher: Sha256,
    inputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(subcommand.as_bytes());
        hasher.update([0]);
        Self {
            subcommand: subcommand.to_string(),
            hasher,
            inputs: Vec::new(),
        }
    }

    pub fn options<T: Serialize>(&mut self, options: &T) -> Result<()> {
        self.hasher.update(serde_json::to_vec(options)?);
        self.hasher.update([0]);
        Ok(())
    }

    /// Hashes a file, or every file below a directory in name order.
    pub fn file(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(path.display().to_string());
        self.hash_path(path)
    }

    fn hash_path(&mut self, path: &Path) -> Result<()> {
        if path.is_dir() {
            let mut entries = std::fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<Vec<_>>>()
                .map_err(|e| Error::io(path, e))?;
            entries.sort();
            for entry in entries {
                if let Some(name) = entry.file_name() {
                    self.hasher.update(name.as_encoded_bytes());
                }
                self.hash_path(&entry)?;
            }
            Ok(())
        } else {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            self.bytes(&bytes);
            Ok(())
        }
    }

    /// An input that is not a file, such as bundled demo data.
    pub fn text(&mut self, label: &str, contents: &str) {
        self.inputs.push(label.to_string());
        self.bytes(contents.as_bytes());
    }

    fn bytes(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(self, seed: Option<u64>) -> RunManifest {
        let mut hasher = self.hasher;
        if let Some(seed) = seed {
            hasher.update(seed.to_le_bytes());
        }
        RunManifest {
            subcommand: self.subcommand,
            inputs: self.inputs,
            config_hash: hex::encode(hasher.finalize()),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
        }
    }
}

/// `SOURCE_DATE_EPOCH` when set, so that reproducible builds of a report
/// stay byte-identical; otherwise `unrecorded`.
fn timestamp() -> String {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) if v.trim().parse::<u64>().is_ok() => format!("unix:{}", v.trim()),
        _ => "unrecorded".to_string(),
    }
}

/// Independent seed for one consumer of the run seed.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}
