//! Report assembly and output.

use std::io::Write;
use std::path::Path;

use nrsector_core::{CMatrix, Complex64};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// One verdict with the worst defect seen and the tolerance it was held to.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub worst_defect: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `worst_defect ≤ tolerance`.
    pub fn bound(name: &'static str, worst_defect: f64, tolerance: f64) -> Self {
        Check { name, passed: worst_defect <= tolerance, worst_defect, tolerance }
    }
}

/// Column headers and rows for CSV output.
#[derive(Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push<I, T>(&mut self, row: I)
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        self.rows.push(row.into_iter().map(|v| v.to_string()).collect());
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// What a command hands back to the driver.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub result: Value,
    pub table: Table,
}

#[derive(Serialize)]
pub struct Report<'a, C: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub seed: u64,
    /// Seconds; `null` under `--no-timing`.
    pub wall_time_s: Option<f64>,
    pub passed: bool,
    pub checks: &'a [Check],
    pub result: &'a Value,
}

pub fn cx(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn cx_vec(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| cx(*z)).collect()
}

pub fn cx_matrix(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|r| r.iter().map(|z| cx(*z)).collect()).collect()
}

/// Writes `bytes` to `path` through a temporary file in the same
/// directory, so readers never observe a partial report. `None` means
/// stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}
