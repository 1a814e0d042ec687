use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, Result};

/// Numeric table read from a headed CSV file. Row order is preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl Table {
    pub fn nrows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn ncols(&self) -> usize {
        self.headers.len()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.index
            .get(name)
            .map(|&j| self.columns[j].as_slice())
            .ok_or_else(|| CliError::input(format!("dataset has no column `{name}`")))
    }

    pub fn vector(&self, name: &str) -> Result<DVector<f64>> {
        Ok(DVector::from_column_slice(self.column(name)?))
    }

    /// Columns stacked in the given order.
    pub fn matrix(&self, names: &[String]) -> Result<DMatrix<f64>> {
        if names.is_empty() {
            return Err(CliError::input("empty column selection"));
        }
        let cols = names.iter().map(|n| self.column(n)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(self.nrows(), cols.len(), |i, j| cols[j][i]))
    }
}

pub fn parse_dataset(text: &str, source: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::input(format!("{source}: cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::input(format!("{source}: missing header row")));
    }
    let mut index = HashMap::new();
    for (j, h) in headers.iter().enumerate() {
        if h.is_empty() {
            return Err(CliError::input(format!(
                "{source}: column {} has an empty header",
                j + 1
            )));
        }
        if index.insert(h.clone(), j).is_some() {
            return Err(CliError::input(format!("{source}: duplicate column `{h}`")));
        }
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (r, record) in reader.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => CliError::input(format!(
                "{source}: row {line} has {len} fields, expected {expected_len}"
            )),
            _ => CliError::input(format!("{source}: row {line}: {e}")),
        })?;
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(CliError::input(format!(
                    "{source}: row {line}, column {} (`{}`) is empty",
                    j + 1,
                    headers[j]
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::input(format!(
                    "{source}: row {line}, column {} (`{}`): `{cell}` is not a number",
                    j + 1,
                    headers[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::input(format!(
                    "{source}: row {line}, column {} (`{}`) is not finite",
                    j + 1,
                    headers[j]
                )));
            }
            columns[j].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(CliError::input(format!("{source}: no data rows")));
    }
    Ok(Table {
        headers,
        columns,
        index,
    })
}

pub fn load_dataset(path: &Path) -> Result<Table> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        CliError::input(format!(
            "{}: not UTF-8 (byte {})",
            path.display(),
            e.utf8_error().valid_up_to()
        ))
    })?;
    parse_dataset(&text, &path.display().to_string())
}
