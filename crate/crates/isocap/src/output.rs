//! CSV records, sidecar metadata and zonal-function files.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use isocap_core::{LatitudeGrid, ZonalFunction};
use serde_json::Value;

use crate::error::{AppError, AppResult};

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// A table with a fixed header; rows are written in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> AppResult<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> AppResult<()> {
        self.write_to(File::create(path)?)
    }

    pub fn to_csv_string(&self) -> AppResult<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| AppError::Config(e.to_string()))
    }
}

/// `<dir>/<stem>.<suffix>` next to `out`, e.g. `run.per_y.csv` for `run.csv`.
pub fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// Everything an experiment produced: the main table plus named detail tables.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub main: Table,
    /// `(suffix, table)`, written to `<stem>.<suffix>`.
    pub details: Vec<(&'static str, Table)>,
}

impl Artifacts {
    /// Writes the main table to `out` (stdout if `None`) and, when a path is
    /// given, the detail tables and the sidecar JSON.
    pub fn write(&self, out: Option<&Path>, sidecar: &Value) -> AppResult<()> {
        match out {
            None => self.main.write_to(io::stdout().lock()),
            Some(path) => {
                self.main.write_path(path)?;
                for (suffix, table) in &self.details {
                    table.write_path(&companion_path(path, suffix))?;
                }
                let mut f = File::create(companion_path(path, "json"))?;
                serde_json::to_writer_pretty(&mut f, sidecar)?;
                writeln!(f)?;
                Ok(())
            }
        }
    }
}

/// ZonalFunction as CSV with columns `cell_index, latitude_midpoint, value`.
pub fn zonal_table(f: &ZonalFunction) -> Table {
    let mut t = Table::new(&["cell_index", "latitude_midpoint", "value"]);
    for (i, (&mid, &v)) in f.grid().midpoints().iter().zip(f.values()).enumerate() {
        t.push(vec![i.to_string(), fmt_f64(mid), fmt_f64(v)]);
    }
    t
}

pub fn write_zonal<W: Write>(f: &ZonalFunction, w: W) -> AppResult<()> {
    zonal_table(f).write_to(w)
}

/// Reads values written by [`write_zonal`] onto `grid`, checking that cell
/// indices and midpoints match it.
pub fn read_zonal<R: Read>(grid: &Arc<LatitudeGrid>, r: R) -> AppResult<ZonalFunction> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["cell_index", "latitude_midpoint", "value"] {
        return Err(AppError::Config(format!("unexpected zonal CSV header {header:?}")));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> AppResult<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| AppError::Config(format!("row {k}, column {i}: {e}")))
        };
        let idx: usize = rec[0]
            .parse()
            .map_err(|e| AppError::Config(format!("row {k}: bad cell index: {e}")))?;
        if idx != k || k >= grid.len() {
            return Err(AppError::Config(format!("row {k}: cell index {idx} out of order")));
        }
        let mid = field(1)?;
        if (mid - grid.midpoints()[k]).abs() > 1e-12 {
            return Err(AppError::Config(format!(
                "row {k}: midpoint {mid} does not match the grid"
            )));
        }
        values.push(field(2)?);
    }
    if values.len() != grid.len() {
        return Err(AppError::Config(format!(
            "expected {} cells, found {}",
            grid.len(),
            values.len()
        )));
    }
    Ok(ZonalFunction::new(grid.clone(), values)?)
}
