//! CSV series and JSON metadata sidecars, written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// `<stem>.ldos.csv` next to `out`.
pub fn ldos_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.ldos.csv"))
}

/// Comma-separated table with one header row. Numbers use the shortest
/// round-trip scientific form, so identical inputs give identical bytes.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    /// `None` fields are written empty.
    pub fn row(&mut self, fields: &[Option<f64>]) {
        debug_assert_eq!(fields.len(), self.columns);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            if let Some(v) = f {
                let _ = write!(self.text, "{v:e}");
            }
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        write_atomic(path, self.text.as_bytes())
    }
}

pub fn write_metadata(
    out: &Path,
    command: &str,
    parameters: Value,
    derived: Value,
    warnings: &[String],
    started: Instant,
) -> io::Result<()> {
    let meta = json!({
        "command": command,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "parameters": parameters,
        "derived": derived,
        "warnings": warnings,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "generated_unix_s": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    let mut text = serde_json::to_string_pretty(&meta).map_err(io::Error::other)?;
    text.push('\n');
    write_atomic(&meta_path(out), text.as_bytes())
}
