//! Check reports and convergence tables.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `value ≤ tolerance`.
    AtMost,
    /// `value ≥ tolerance`.
    AtLeast,
    /// `value > tolerance`.
    Above,
    /// `value == tolerance`.
    Equals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub quantity: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
}

impl Measurement {
    pub fn new(quantity: &str, value: f64, relation: Relation, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Above => value > tolerance,
            Relation::Equals => value == tolerance,
        };
        Self {
            quantity: quantity.to_string(),
            value,
            relation,
            tolerance,
            pass,
        }
    }

    pub fn at_most(quantity: &str, value: f64, tolerance: f64) -> Self {
        Self::new(quantity, value, Relation::AtMost, tolerance)
    }

    pub fn at_least(quantity: &str, value: f64, tolerance: f64) -> Self {
        Self::new(quantity, value, Relation::AtLeast, tolerance)
    }

    pub fn above(quantity: &str, value: f64, tolerance: f64) -> Self {
        Self::new(quantity, value, Relation::Above, tolerance)
    }

    pub fn equals(quantity: &str, value: f64, expected: f64) -> Self {
        Self::new(quantity, value, Relation::Equals, expected)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub params: serde_json::Value,
    pub measured: Vec<Measurement>,
    pub pass: bool,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub runtime: f64,
    pub seed: u64,
}

impl Report {
    pub fn new(name: &str, params: serde_json::Value, measured: Vec<Measurement>, runtime: f64, seed: u64) -> Self {
        let pass = !measured.is_empty() && measured.iter().all(|m| m.pass);
        Self {
            name: name.to_string(),
            params,
            measured,
            pass,
            runtime,
            seed,
        }
    }

    /// Report for a check that raised an error instead of measuring.
    pub fn failed(name: &str, params: serde_json::Value, err: &Error, runtime: f64, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            params: serde_json::json!({ "params": params, "error": err.to_string() }),
            measured: Vec::new(),
            pass: false,
            runtime,
            seed,
        }
    }

    pub fn measurement(&self, quantity: &str) -> Option<&Measurement> {
        self.measured.iter().find(|m| m.quantity == quantity)
    }
}

/// Numeric table written as `tables/<name>.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Everything one invocation produces.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub reports: Vec<Report>,
    pub tables: Vec<Table>,
}

impl RunOutput {
    pub fn all_pass(&self) -> bool {
        !self.reports.is_empty() && self.reports.iter().all(|r| r.pass)
    }

    pub fn extend(&mut self, other: RunOutput) {
        self.reports.extend(other.reports);
        self.tables.extend(other.tables);
    }

    /// Writes `report.json` and `tables/*.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("tables"))?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&self.reports)?)?;
        for t in &self.tables {
            t.write_csv(&dir.join("tables").join(format!("{}.csv", t.name)))?;
        }
        Ok(())
    }
}
