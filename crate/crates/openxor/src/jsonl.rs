//! JSONL dataset and result-file I/O.
//!
//! Datasets are one [`Instance`] JSON object per line, UTF-8, LF-terminated,
//! no trailing whitespace. Solver results use the same framing with one
//! [`ResultRow`] per line.

use crate::model::{Instance, ModelError, Op};
use crate::solvers::Status;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: String,
        line: usize,
        #[source]
        source: ModelError,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> JsonlError {
    JsonlError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parse one dataset line into a validated instance.
pub fn parse_instance_line(line: &str) -> Result<Instance, String> {
    let inst: Instance = serde_json::from_str(line).map_err(|e| e.to_string())?;
    inst.validate().map_err(|e| e.to_string())?;
    Ok(inst)
}

pub fn read_instances(path: &Path) -> Result<Vec<Instance>, JsonlError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: Instance = serde_json::from_str(&line).map_err(|e| JsonlError::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            source: e,
        })?;
        inst.validate().map_err(|e| JsonlError::Invalid {
            path: path.display().to_string(),
            line: idx + 1,
            source: e,
        })?;
        out.push(inst);
    }
    Ok(out)
}

/// Serialize instances to the canonical JSONL bytes: compact JSON, one line
/// per instance, LF separators, trailing LF on the final line.
pub fn instances_to_bytes(instances: &[Instance]) -> Vec<u8> {
    let mut buf = Vec::new();
    for inst in instances {
        serde_json::to_writer(&mut buf, inst).expect("instance serialization is infallible");
        buf.push(b'\n');
    }
    buf
}

pub fn write_instances(path: &Path, instances: &[Instance]) -> Result<(), JsonlError> {
    let bytes = instances_to_bytes(instances);
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// One solver result as written by `solve`/`infer` and consumed by `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub id: String,
    pub status: Status,
    pub ops: Option<Vec<Op>>,
    pub nodes: u64,
    pub time_s: f64,
}

/// Parse one result line. Used by `eval` and fuzzed directly.
pub fn parse_result_line(line: &str) -> Result<ResultRow, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, JsonlError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| JsonlError::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            source: e,
        })?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), JsonlError> {
    let mut buf = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut buf, row).expect("result serialization is infallible");
        buf.push(b'\n');
    }
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

/// SHA-256 of a file's bytes, hex-encoded. Used in report fingerprints.
pub fn file_sha256(path: &Path) -> Result<String, JsonlError> {
    use sha2::{Digest, Sha256};
    let mut file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let read = file.read(&mut buf).map_err(|e| io_err(path, e))?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
    }
    Ok(hex_encode(&hasher.finalize()))
}

fn hex_encode(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        use std::fmt::Write as _;
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// Atomic file write: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), JsonlError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile_in(dir).map_err(|e| io_err(path, e))?;
    tmp.1.write_all(contents).map_err(|e| io_err(path, e))?;
    tmp.1.flush().map_err(|e| io_err(path, e))?;
    drop(tmp.1);
    fs::rename(&tmp.0, path).map_err(|e| io_err(path, e))
}

fn tempfile_in(dir: &Path) -> std::io::Result<(std::path::PathBuf, fs::File)> {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nonce = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    for attempt in 0..64 {
        let candidate = dir.join(format!(".tmp-{nonce}-{attempt}"));
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&candidate)
        {
            Ok(f) => return Ok((candidate, f)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    Err(std::io::Error::other("could not create temp file"))
}
