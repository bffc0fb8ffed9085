//! Artifact writers. Floats go out with 17 significant digits.

use crate::config::{Emit, OutputSpec};
use crate::error::CliError;
use serde::Serialize;
use std::path::PathBuf;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column name and unit, recorded in JSON sidecars.
#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
        w.write_record(self.columns.iter().map(|c| c.name)).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
    }
}

/// Single writer for one run's artifacts.
pub struct Sink {
    spec: OutputSpec,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(spec: OutputSpec) -> Result<Self, CliError> {
        std::fs::create_dir_all(&spec.dir).map_err(|e| CliError::io(&spec.dir, e))?;
        Ok(Sink {
            spec,
            written: Vec::new(),
        })
    }

    pub fn wants(&self, e: Emit) -> bool {
        self.spec.wants(e)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.spec.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        if self.wants(Emit::Csv) {
            let bytes = table.to_csv()?;
            self.write(name, &bytes)?;
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if self.wants(Emit::Json) {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(format!("json: {e}")))?;
            s.push('\n');
            self.write(name, s.as_bytes())?;
        }
        Ok(())
    }

    pub fn svg(&mut self, name: &str, doc: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.wants(Emit::Svg) {
            self.write(name, doc().as_bytes())?;
        }
        Ok(())
    }
}
