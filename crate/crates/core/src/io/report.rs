//! Report tables with a fixed numeric format.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

use super::io_err;

/// Rounds to 15 significant digits, then prints the shortest decimal that
/// reads back to the rounded value.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{v:.14e}").parse().expect("formatted float parses");
    // avoid "-0"
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

/// Empty field for `None`.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// A header plus string rows, written as RFC 4180 CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_writer<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let conv = |e: csv::Error| crate::error::Error::Io(e.to_string());
        wtr.write_record(&self.header).map_err(conv)?;
        for r in &self.rows {
            wtr.write_record(r).map_err(conv)?;
        }
        wtr.flush().map_err(|e| crate::error::Error::Io(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
        self.to_writer(std::io::BufWriter::new(f))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.to_writer(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a table written by [`save`](Self::save).
    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
        let header = rdr.headers().map_err(|e| io_err(path, e))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.map_err(|e| io_err(path, e))?.iter().map(String::from).collect());
        }
        Ok(Table { header, rows })
    }
}
