//! Output directory bookkeeping and the reproducibility manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const TIMINGS: &str = "timings.json";

/// CSV header comment; bump the version whenever columns change.
pub const CSV_VERSION: &str = "salt-csv v1";

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    /// Size and digest are absent for volatile files (wall-clock timings).
    pub bytes: Option<u64>,
    pub sha256: Option<String>,
    pub volatile: bool,
}

/// Manifest of one run: enough to reproduce every deterministic output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_sha256: String,
    pub seeds: serde_json::Value,
    pub grid: serde_json::Value,
    pub ensemble: serde_json::Value,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes files under one root and records each of them.
pub struct OutDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn put(&mut self, rel: &str, bytes: &[u8], volatile: bool) -> anyhow::Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.retain(|f| f.path != rel);
        self.files.push(FileEntry {
            path: rel.to_string(),
            bytes: (!volatile).then_some(bytes.len() as u64),
            sha256: (!volatile).then(|| sha256_hex(bytes)),
            volatile,
        });
        Ok(())
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> anyhow::Result<()> {
        self.put(rel, bytes, false)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(rel, text.as_bytes(), false)
    }

    /// CSV with a versioned comment line ahead of the header row.
    pub fn write_csv(&mut self, rel: &str, kind: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        let mut buf = format!("# {CSV_VERSION} {kind}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        self.put(rel, &buf, false)
    }

    /// Writes the volatile timings file and the manifest listing every output.
    pub fn finish(mut self, mut manifest: RunManifest, timings: &serde_json::Value) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(timings)?;
        text.push('\n');
        self.put(TIMINGS, text.as_bytes(), true)?;
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        manifest.files = self.files;
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
