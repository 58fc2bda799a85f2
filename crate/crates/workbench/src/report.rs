//! CSV and manifest emission. Every number a run produces leaves through
//! [`float_text`], so a NaN anywhere in a result set turns into an
//! integrity error instead of a poisoned file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{io_err, Error, Result};

/// 12 significant digits in scientific notation. That is enough for any
/// consumer comparing at the tolerances this suite works to, and printing
/// is deterministic, so byte-identical files mean bit-identical results.
pub fn float_text(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::Integrity(format!("refusing to write non-finite value {x}")));
    }
    Ok(format!("{x:.11e}"))
}

#[derive(Clone, Debug)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> Result<String> {
        match self {
            Cell::Float(x) => float_text(*x),
            Cell::Int(v) => Ok(v.to_string()),
            Cell::Text(s) => {
                debug_assert!(!s.contains(','), "text cells must not contain separators");
                Ok(s.clone())
            }
            Cell::Bool(b) => Ok(b.to_string()),
        }
    }
}

/// Writes a header row plus data rows, newline-terminated. An empty row set
/// produces a header-only file, which is still a valid, parseable result.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut text = String::with_capacity(16 + rows.len() * 48);
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width must match the header");
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            text.push_str(&cell.render()?);
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err("writing", path, e))
}

/// Per-file entry in the manifest: how many data rows, and whether they
/// came from a full enumeration or a sampled estimate (scan-backed files
/// only).
#[derive(Clone, Debug, Serialize)]
pub struct OutputMeta {
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated: Option<bool>,
}

impl OutputMeta {
    pub fn plain(rows: usize) -> Self {
        OutputMeta { rows, exhaustive: None, estimated: None }
    }

    pub fn scanned(rows: usize, exhaustive: bool) -> Self {
        OutputMeta { rows, exhaustive: Some(exhaustive), estimated: Some(!exhaustive) }
    }
}

/// Everything needed to rerun or audit an invocation: the subcommand, the
/// fully resolved parameters, crate versions, wall-clock timings, and one
/// entry per file written.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub versions: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, u128>,
    pub outputs: BTreeMap<String, OutputMeta>,
}

impl Manifest {
    pub fn new(subcommand: &str, params: serde_json::Value) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("workbench".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("xychain".to_string(), xychain::VERSION.to_string());
        Manifest {
            subcommand: subcommand.to_string(),
            params,
            versions,
            timings_ms: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn time(&mut self, phase: &str, ms: u128) {
        self.timings_ms.insert(phase.to_string(), ms);
    }

    pub fn output(&mut self, file: &str, meta: OutputMeta) {
        self.outputs.insert(file.to_string(), meta);
    }

    /// Serializes to `run_manifest.json` in the output directory.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("run_manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Io(format!("encoding manifest: {e}")))?;
        fs::write(&path, text + "\n").map_err(|e| io_err("writing", &path, e))?;
        Ok(path)
    }
}
