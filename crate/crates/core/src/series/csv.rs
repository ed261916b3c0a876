//! CSV format for histories and output tables.
//!
//! Header row first, first column `t`, then one or more value columns
//! (`t,value` for a single history). Decimal point `.`, UTF-8, rows in
//! ascending `t`, lines starting with `#` are comments. Numbers are written
//! with 17 significant digits so every file reads back bit-exactly;
//! infinite sentinels are written as `inf`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{RangePolicy, Series, SeriesKind, TimeGrid};
use crate::error::{Error, Result};

/// A parsed CSV table: column names plus rows of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Source line of each row, for diagnostics.
    pub lines: Vec<usize>,
    pub source: String,
}

impl Table {
    pub fn read_path(path: impl AsRef<Path>) -> Result<Table> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::read(file, &path.display().to_string())
    }

    pub fn read<R: Read>(mut reader: R, source: &str) -> Result<Table> {
        let input_err = |row: usize, column: &str, message: String| Error::Input {
            path: source.to_string(),
            row,
            column: column.to_string(),
            message,
        };
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| input_err(0, "-", e.to_string()))?;
        // Drop comments and blank lines ourselves so every record keeps its
        // 1-based line number in the original file.
        let mut kept = String::with_capacity(text.len());
        let mut line_of = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            kept.push_str(trimmed);
            kept.push('\n');
            line_of.push(i + 1);
        }
        if line_of.is_empty() {
            return Err(input_err(0, "-", "no header row".into()));
        }
        let mut rdr = ::csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(::csv::Trim::All)
            .from_reader(kept.as_bytes());
        let header_line = line_of[0];
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| input_err(header_line, "-", e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if columns.first().map(String::as_str) != Some("t") {
            return Err(input_err(header_line, "t", "first header column must be `t`".into()));
        }
        if columns.len() < 2 {
            return Err(input_err(header_line, "-", "need at least one value column".into()));
        }
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let line = line_of.get(i + 1).copied().unwrap_or(0);
            let record = record.map_err(|e| input_err(line, "-", e.to_string()))?;
            let mut row = Vec::with_capacity(columns.len());
            for (field, name) in record.iter().zip(&columns) {
                let value: f64 = field
                    .parse()
                    .map_err(|_| input_err(line, name, format!("not a number: `{field}`")))?;
                row.push(value);
            }
            lines.push(line);
            rows.push(row);
        }
        Ok(Table {
            columns,
            rows,
            lines,
            source: source.to_string(),
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Extracts one value column as a validated series. With `column =
    /// None` the table must have exactly one value column (or one named
    /// `value`). Validation failures are reported against the source line.
    pub fn series(&self, column: Option<&str>, kind: SeriesKind, policy: RangePolicy) -> Result<Series> {
        let name = match column {
            Some(c) => c.to_string(),
            None if self.columns.len() == 2 => self.columns[1].clone(),
            None if self.columns.iter().any(|c| c == "value") => "value".to_string(),
            None => {
                return Err(Error::Input {
                    path: self.source.clone(),
                    row: 1,
                    column: "-".into(),
                    message: format!("several value columns ({}); select one", self.columns[1..].join(", ")),
                })
            }
        };
        let values = self.column(&name).ok_or_else(|| Error::Input {
            path: self.source.clone(),
            row: 1,
            column: name.clone(),
            message: "no such column".into(),
        })?;
        let times = self.column("t").unwrap();
        let at_row = |index: usize, column: &str, e: &Error| Error::Input {
            path: self.source.clone(),
            row: self.lines.get(index).copied().unwrap_or(0),
            column: column.to_string(),
            message: e.to_string(),
        };
        let grid = TimeGrid::new(times).map_err(|e| match e {
            Error::NonIncreasing { index, .. } | Error::NonFinite { index, .. } => at_row(index, "t", &e),
            other => at_row(0, "t", &other),
        })?;
        Series::on_grid(grid, values, kind, policy).map_err(|e| match e {
            Error::NonFinite { index, .. } | Error::OutOfRange { index, .. } => at_row(index, &name, &e),
            other => at_row(0, &name, &other),
        })
    }
}

/// 17 significant digits, round-trip exact.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_table<W: Write>(mut out: W, columns: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_series<W: Write>(out: W, series: &Series) -> std::io::Result<()> {
    let rows: Vec<Vec<f64>> = series
        .times()
        .iter()
        .zip(series.values())
        .map(|(&t, &v)| vec![t, v])
        .collect();
    write_table(out, &["t", "value"], &rows)
}
