//! Append-only JSON-lines run store.

use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qdyson_core::Limits;

use crate::request::Request;

pub const STORE_FILE: &str = "runs.jsonl";

/// One executed command with everything needed to re-run it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub command: String,
    pub input: Request,
    pub limits: Limits,
    pub output: Value,
    pub exit_code: i32,
    pub engine_version: String,
    pub elapsed_ms: u64,
}

impl RunRecord {
    pub fn new(input: Request, limits: Limits, output: Value, exit_code: i32, elapsed_ms: u64) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
        RunRecord {
            timestamp,
            command: input.name().to_string(),
            input,
            limits,
            output,
            exit_code,
            engine_version: qdyson_core::ENGINE_VERSION.to_string(),
            elapsed_ms,
        }
    }
}

pub struct Store {
    path: PathBuf,
}

impl Store {
    pub fn new(dir: &Path) -> Self {
        Store { path: dir.join(STORE_FILE) }
    }

    pub fn append(&self, record: &RunRecord) -> std::io::Result<()> {
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let line = serde_json::to_string(record).map_err(std::io::Error::other)?;
        writeln!(f, "{line}")
    }

    /// All records, in append order. A missing store reads as empty.
    pub fn load(&self) -> std::io::Result<Vec<RunRecord>> {
        let f = match fs::File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let mut out = Vec::new();
        for (k, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = serde_json::from_str(&line).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}:{}: {e}", self.path.display(), k + 1))
            })?;
            out.push(rec);
        }
        Ok(out)
    }
}
