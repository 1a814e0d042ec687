use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Floats are written with 17 significant digits so they parse back exactly.
pub fn float(v: f64) -> String {
    // negative zero prints as "-0" and would break byte comparisons across paths
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// CSV document assembled in memory and written in one go.
pub struct CsvDoc {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvDoc {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut doc = Self {
            writer: csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new()),
        };
        doc.row(header.iter().map(|h| h.as_ref().to_string()));
        doc
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        // writing into a Vec cannot fail
        let fields: Vec<String> = fields.into_iter().collect();
        let _ = self.writer.write_record(&fields);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().unwrap_or_default()
    }
}

pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
