//! Data files of a run: CSV tables with a metadata comment line.

use std::fs;
use std::path::{Path, PathBuf};

use noiselab::distribution::fmt_f64;
use sha2::{Digest, Sha256};

use crate::error::LabResult;

/// Number formatted with 17 significant digits.
pub fn num(x: f64) -> String {
    fmt_f64(x)
}

/// Quotes a field that may contain commas.
pub fn quoted(s: impl std::fmt::Display) -> String {
    format!("\"{}\"", s.to_string().replace('"', "\"\""))
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the files written by one experiment.
pub struct OutputSet {
    dir: PathBuf,
    meta: String,
    files: Vec<PathBuf>,
}

impl OutputSet {
    pub(crate) fn new(dir: &Path, meta: String) -> Self {
        Self {
            dir: dir.to_path_buf(),
            meta,
            files: Vec::new(),
        }
    }

    /// Writes `name` as metadata line, header row, then `rows`.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> LabResult<()> {
        let mut text = format!("# {}\n{}\n", self.meta, header.join(","));
        for r in rows {
            debug_assert_eq!(r.len(), header.len());
            text.push_str(&r.join(","));
            text.push('\n');
        }
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }
}
