//! Report envelopes, CSV tables and atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("KLAP_VERSION");

/// One CSV cell. Doubles print with 17 significant digits.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// UTF-8, LF endings, header row first.
    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match c {
                    Cell::Int(v) => write!(out, "{v}").unwrap(),
                    Cell::Float(v) => write!(out, "{v:.16e}").unwrap(),
                    Cell::Text(s) => out.push_str(s),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Wraps a command result with the config echo and version string.
pub fn envelope<C: Serialize, R: Serialize>(
    command: &str,
    seed: u64,
    config: &C,
    passed: bool,
    result: &R,
    timestamp: bool,
) -> serde_json::Result<Value> {
    let mut v = json!({
        "tool": "klap",
        "version": VERSION,
        "command": command,
        "seed": seed,
        "config": serde_json::to_value(config)?,
        "passed": passed,
        "result": serde_json::to_value(result)?,
    });
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        v["timestamp"] = json!(secs);
    }
    Ok(v)
}

/// Pretty JSON with sorted keys and a trailing newline; parsing and
/// re-rendering reproduces the same bytes.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// The one-line error record printed on stderr.
pub fn error_record(kind: &str, message: &str) -> String {
    let message = message.split_whitespace().collect::<Vec<_>>().join(" ");
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}
