//! CSV tables with JSON metadata sidecars. Floats are written with 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// `{:.16e}`: 17 significant digits, enough to round-trip an `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    file: &'a str,
    columns: &'a [String],
    rows: usize,
    #[serde(flatten)]
    meta: &'a Meta,
}

/// An output directory plus the metadata stamped on everything written into it.
#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    meta: Meta,
}

impl Output {
    pub fn create(dir: &Path, meta: Meta) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            meta,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    /// Writes `<name>.csv` and `<name>.csv.json`.
    pub fn write(&self, table: &Table) -> Result<PathBuf, CliError> {
        let file = format!("{}.csv", table.name);
        let path = self.path(&file);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&table.header)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        let side = Sidecar {
            file: &file,
            columns: &table.header,
            rows: table.rows.len(),
            meta: &self.meta,
        };
        self.write_json(&format!("{file}.json"), &side)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(file);
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

/// Linear interpolation of grid data `(xs, vs)` at `x`; `xs` ascending.
pub fn interp_linear(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&s| s <= x);
    if k == 0 {
        return vs[0];
    }
    if k >= xs.len() {
        return vs[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    vs[k - 1] + (x - x0) / (x1 - x0) * (vs[k] - vs[k - 1])
}
