use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::ValueEnum;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// A header row plus records, written RFC 4180 style.
#[derive(Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Everything one command produces, in each of the output formats.
pub struct Report {
    pub command: &'static str,
    pub parameters: Value,
    pub results: Value,
    pub table: String,
    pub csv: CsvTable,
}

impl Report {
    pub fn envelope(&self) -> Value {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        json!({
            "command": self.command,
            "parameters": self.parameters,
            "results": self.results,
            "provenance": {
                "version": lcr_core::VERSION,
                "timestamp": timestamp,
            },
        })
    }

    pub fn emit(&self, format: Format) -> anyhow::Result<()> {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        match format {
            Format::Table => out.write_all(self.table.as_bytes())?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.envelope())?;
                out.write_all(b"\n")?;
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::CRLF)
                    .from_writer(&mut out);
                w.write_record(&self.csv.header)?;
                for row in &self.csv.rows {
                    w.write_record(row)?;
                }
                w.flush().context("writing CSV")?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Probability rounded for human tables.
pub fn p3(p: f64) -> String {
    format!("{p:.3}")
}

/// Full-precision value for machine formats.
pub fn full(x: f64) -> String {
    format!("{x}")
}

/// Right-aligned columns under a left-aligned header line.
pub fn grid(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut s = line(header);
    s.push('\n');
    for row in rows {
        s.push_str(&line(row));
        s.push('\n');
    }
    s
}
