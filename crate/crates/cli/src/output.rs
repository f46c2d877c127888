//! Deterministic artifact writing. Every file goes through [`OutputDir`], which
//! hashes it for the manifest; the manifest itself is written last.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Identifier of the manifest layout, matched by the published schema.
pub const MANIFEST_SCHEMA_ID: &str = "rydmag-manifest/1";
/// JSON Schema for `manifest.json`.
pub const MANIFEST_SCHEMA: &str = include_str!("../schema/manifest.schema.json");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(x) if x.is_nan() => "NaN".into(),
            // shortest round-trip form, scientific outside [1e-5, 1e16)
            Cell::F(x) => format!("{x:?}"),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::F(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::U(x) => (*x).into(),
            Cell::S(s) => s.clone().into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::S(s)
    }
}

/// Column-labelled rows, written as CSV or as `{"columns": …, "rows": …}` JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let rows: Vec<Vec<serde_json::Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let v = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut out = serde_json::to_vec_pretty(&v).expect("table serialises");
        out.push(b'\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub kind: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub schema: String,
    pub tool: String,
    pub tool_version: String,
    pub library_version: String,
    pub command: String,
    pub preset: Option<String>,
    pub seed: u64,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct OutputDir {
    root: PathBuf,
    format: Format,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            format,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Write `bytes` to `rel` (forward slashes) and record it.
    pub fn write(&mut self, rel: &str, kind: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            kind: kind.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Write a table as `<stem>.csv` or `<stem>.json` according to the format.
    pub fn table(&mut self, stem: &str, table: &Table) -> CliResult<()> {
        match self.format {
            Format::Csv => self.write(&format!("{stem}.csv"), "table", &table.to_csv()),
            Format::Json => self.write(&format!("{stem}.json"), "table", &table.to_json()),
        }
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, kind: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("value serialises");
        bytes.push(b'\n');
        self.write(rel, kind, &bytes)
    }

    pub fn svg(&mut self, stem: &str, svg: String) -> CliResult<()> {
        self.write(&format!("{stem}.svg"), "plot", svg.as_bytes())
    }

    /// Write the manifest listing every file written so far.
    pub fn finish(self, command: &str, preset: Option<String>, seed: u64, config_sha256: String) -> CliResult<Manifest> {
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA_ID.to_string(),
            tool: "rydmag".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            library_version: rydmag::VERSION.to_string(),
            command: command.to_string(),
            preset,
            seed,
            config_sha256,
            files: self.files,
        };
        let path = self.root.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}
