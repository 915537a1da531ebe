//! Run manifest: config echo, timestamps, seed ledger and output inventory.

use std::path::{Path, PathBuf};

use rwrs_core::verify::replicate_seeds;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::LoadedConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateSeedEntry {
    pub replicate: u64,
    pub walk: u64,
    pub scenery: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedLedger {
    pub master_seed: u64,
    /// `"config"` or the overriding environment variable.
    pub source: String,
    pub replicates: Vec<ReplicateSeedEntry>,
}

impl SeedLedger {
    /// Derived seeds of replicates `0..count`.
    pub fn new(master_seed: u64, source: &str, count: u64) -> Self {
        let replicates = (0..count)
            .map(|i| {
                let s = replicate_seeds(master_seed, i);
                ReplicateSeedEntry {
                    replicate: i,
                    walk: s.walk,
                    scenery: s.scenery,
                }
            })
            .collect();
        Self {
            master_seed,
            source: source.into(),
            replicates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub seed_ledger: SeedLedger,
    pub outputs: Vec<OutputEntry>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write `bytes` to `path` via a sibling temp file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Output files of one command, written atomically and inventoried.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.entries.push(OutputEntry {
            file: name.into(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn files(&self) -> Vec<PathBuf> {
        self.entries
            .iter()
            .map(|e| self.dir.join(&e.file))
            .collect()
    }

    /// Write `manifest.json` listing every file written so far.
    pub fn finish(
        mut self,
        command: &str,
        config: &LoadedConfig,
        started_at: String,
        ledger_replicates: u64,
    ) -> Result<Vec<PathBuf>, CliError> {
        let manifest = RunManifest {
            schema_version: crate::report::SCHEMA_VERSION,
            artifact: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: serde_json::to_value(&config.run).expect("config serializes"),
            config_hash: config.hash(),
            started_at,
            finished_at: now(),
            seed_ledger: SeedLedger::new(
                config.experiment.master_seed,
                &config.seed_source,
                ledger_replicates,
            ),
            outputs: self.entries.clone(),
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        let path = self.dir.join("manifest.json");
        write_atomic(&path, json.as_bytes())?;
        let mut files = self.files();
        files.push(path);
        self.entries.clear();
        Ok(files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::new(dir.path()).unwrap();
        out.write("a.txt", b"hello").unwrap();
        assert_eq!(std::fs::read(dir.path().join("a.txt")).unwrap(), b"hello");
        assert!(!dir.path().join("a.txt.tmp").exists());
        assert_eq!(out.entries[0].sha256, sha256_hex(b"hello"));
        assert_eq!(out.entries[0].sha256.len(), 64);
    }

    #[test]
    fn ledger_lists_derived_seeds() {
        let l = SeedLedger::new(5, "config", 3);
        assert_eq!(l.replicates.len(), 3);
        assert_eq!(l.replicates[2].walk, replicate_seeds(5, 2).walk);
    }
}
