//! Report writing: aligned tables for humans, delimited text and structured
//! records for machines. Machine-readable output is byte-deterministic for
//! identical inputs and flags.

use crate::error::CliError;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    /// Aligned plain-text table.
    Table,
    /// Comma-separated values with a header row.
    Delimited,
    /// One JSON object per line.
    Records,
}

/// Millibit and other measure values print with 4 decimal places unless full
/// precision is requested.
pub fn format_value(value: f64, full_precision: bool) -> String {
    if full_precision {
        format!("{value}")
    } else {
        format!("{value:.4}")
    }
}

/// Counts are integers in all bundled data; print them without a fraction
/// when they are whole.
pub fn format_count(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
    }
}

/// A report: notes, a header and data rows, rendered per format.
pub struct Report {
    pub notes: Vec<String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Parallel JSON objects for the records format.
    pub records: Vec<serde_json::Value>,
}

impl Report {
    pub fn new(headers: &[&str]) -> Self {
        Report {
            notes: Vec::new(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn row(&mut self, cells: Vec<String>, record: serde_json::Value) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
        self.records.push(record);
    }

    pub fn write(&self, out: &mut dyn Write, format: OutputFormat) -> Result<(), CliError> {
        let io_err = |e: std::io::Error| CliError::io("cannot write report", e);
        match format {
            OutputFormat::Table => {
                for note in &self.notes {
                    writeln!(out, "# {note}").map_err(io_err)?;
                }
                let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
                for row in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                let render = |cells: &[String], out: &mut dyn Write| -> std::io::Result<()> {
                    let line = cells
                        .iter()
                        .zip(&widths)
                        .map(|(cell, w)| format!("{cell:>w$}", w = w))
                        .collect::<Vec<_>>()
                        .join("  ");
                    writeln!(out, "{}", line.trim_end())
                };
                render(&self.headers, out).map_err(io_err)?;
                for row in &self.rows {
                    render(row, out).map_err(io_err)?;
                }
            }
            OutputFormat::Delimited => {
                let mut writer = csv::Writer::from_writer(vec![]);
                writer.write_record(&self.headers).map_err(|e| CliError::Validation(e.to_string()))?;
                for row in &self.rows {
                    writer.write_record(row).map_err(|e| CliError::Validation(e.to_string()))?;
                }
                let data = writer.into_inner().map_err(|e| CliError::Validation(e.to_string()))?;
                out.write_all(&data).map_err(io_err)?;
            }
            OutputFormat::Records => {
                for record in &self.records {
                    let line = serde_json::to_string(record).map_err(|e| CliError::Validation(e.to_string()))?;
                    writeln!(out, "{line}").map_err(io_err)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_use_four_decimals_by_default() {
        assert_eq!(format_value(-0.044832619919166206, false), "-0.0448");
        assert_eq!(format_value(-0.044832619919166206, true), "-0.044832619919166206");
    }

    #[test]
    fn counts_drop_integral_fractions() {
        assert_eq!(format_count(110540.0), "110540");
        assert_eq!(format_count(0.5), "0.5");
    }

    #[test]
    fn table_alignment_is_stable() {
        let mut report = Report::new(&["year", "t"]);
        report.note("mode: closed7");
        report.row(vec!["1993".into(), "-183.0873".into()], serde_json::json!({"year": 1993}));
        let mut buf = Vec::new();
        report.write(&mut buf, OutputFormat::Table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# mode: closed7\nyear          t\n1993  -183.0873\n");
    }
}
