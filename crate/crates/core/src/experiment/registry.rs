use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, json_err, Cell, Result};
use crate::harness::{Method, TransferResult};

pub const REGISTRY_FILE: &str = "registry.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub source_id: String,
    pub target_id: String,
    pub method: Method,
    pub seed: u64,
    pub error: String,
}

/// Append-only JSON-lines log of finished cells.
#[derive(Debug)]
pub struct Registry {
    dir: PathBuf,
    rows: Vec<TransferResult>,
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(json_err(path))?);
        }
    }
    Ok(out)
}

fn append_line<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut line = serde_json::to_vec(value).map_err(json_err(path))?;
    line.push(b'\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    f.write_all(&line).map_err(io_err(path))?;
    f.sync_all().map_err(io_err(path))
}

impl Registry {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let rows = read_lines(&dir.join(REGISTRY_FILE))?;
        Ok(Registry { dir, rows })
    }

    pub fn rows(&self) -> &[TransferResult] {
        &self.rows
    }

    pub fn path(&self) -> PathBuf {
        self.dir.join(REGISTRY_FILE)
    }

    pub fn failures(&self) -> Result<Vec<FailureRecord>> {
        read_lines(&self.dir.join(FAILURES_FILE))
    }

    pub fn find(&self, cell: &Cell) -> Option<&TransferResult> {
        self.rows.iter().find(|r| {
            r.source_id == cell.source && r.target_id == cell.target && r.method == cell.method && r.seed == cell.seed
        })
    }

    pub fn completed(&self) -> HashSet<Cell> {
        self.rows
            .iter()
            .map(|r| Cell { source: r.source_id.clone(), target: r.target_id.clone(), method: r.method, seed: r.seed })
            .collect()
    }

    /// Appends and fsyncs one row.
    pub fn append(&mut self, row: TransferResult) -> Result<()> {
        append_line(&self.path(), &row)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn record_failure(&self, cell: &Cell, error: &str) -> Result<()> {
        let rec = FailureRecord {
            source_id: cell.source.clone(),
            target_id: cell.target.clone(),
            method: cell.method,
            seed: cell.seed,
            error: error.to_string(),
        };
        append_line(&self.dir.join(FAILURES_FILE), &rec)
    }
}
