//! CSV and JSON artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// A numeric table with fixed column order.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<(), CliError> {
        self.push_opt(row.into_iter().map(Some).collect())
    }

    /// `None` cells are written empty.
    pub fn push_opt(&mut self, row: Vec<Option<f64>>) -> Result<(), CliError> {
        assert_eq!(row.len(), self.columns.len(), "row width");
        if let Some(i) = row.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(CliError::NonFinite(self.columns[i].to_string()));
        }
        self.rows.push(row);
        Ok(())
    }
}

/// Writes `# config: {...}` followed by the table.
pub fn write_csv(path: &Path, cfg: &ExperimentConfig, table: &Table) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# config: {}", serde_json::to_string(cfg)?)?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(&table.columns)?;
    for r in &table.rows {
        w.write_record(r.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

/// A text table with a pass column (for check listings).
pub fn write_checks(path: &Path, cfg: &ExperimentConfig, rows: &[crate::checks::Check]) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# config: {}", serde_json::to_string(cfg)?)?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["name", "value", "reference", "abs_error", "tolerance", "pass"])?;
    for c in rows {
        if !c.value.is_finite() {
            return Err(CliError::NonFinite(c.name.clone()));
        }
        w.write_record([
            c.name.clone(),
            c.value.to_string(),
            c.reference.to_string(),
            c.abs_error().to_string(),
            c.tolerance.to_string(),
            c.pass().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}
