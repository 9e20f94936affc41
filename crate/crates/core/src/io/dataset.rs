//! Sample CSVs with header `period,x,y1,y2`; empty fields are unobserved.
//!
//! Outcome tokens are numbers and become levels valued at that number.
//! Covariate tokens are free text. Line numbers in errors count the header
//! as line 1.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::dist::{Alphabet, Level};
use crate::error::{Error, Result};
use crate::samples::{SampleRow, SampleSet};

use super::{fmt_num, io_err};

const HEADER: [&str; 4] = ["period", "x", "y1", "y2"];

struct RawRow {
    line: usize,
    period: i32,
    x: String,
    y1: Option<f64>,
    y2: Option<f64>,
}

fn parse_outcome(field: &str, line: usize, name: &str) -> Result<Option<f64>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::ParseError { line, message: format!("{name} token {field:?} is not a finite number") }),
    }
}

fn parse_rows<R: Read>(reader: R) -> Result<Vec<RawRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut out = Vec::new();
    let mut saw_header = false;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| Error::ParseError { line, message: e.to_string() })?;
        if rec.len() != 4 {
            return Err(Error::ParseError { line, message: format!("expected 4 fields, found {}", rec.len()) });
        }
        if line == 1 {
            if rec.iter().map(str::trim).ne(HEADER) {
                return Err(Error::ParseError { line, message: format!("header must be {}", HEADER.join(",")) });
            }
            saw_header = true;
            continue;
        }
        let period = rec[0]
            .trim()
            .parse::<i32>()
            .map_err(|_| Error::ParseError { line, message: format!("period {:?} is not an integer", &rec[0]) })?;
        let x = rec[1].trim().to_string();
        if x.is_empty() {
            return Err(Error::SchemaViolation { line, reason: "covariate is empty".into() });
        }
        out.push(RawRow {
            line,
            period,
            x,
            y1: parse_outcome(&rec[2], line, "y1")?,
            y2: parse_outcome(&rec[3], line, "y2")?,
        });
    }
    if !saw_header {
        return Err(Error::ParseError { line: 1, message: "missing header".into() });
    }
    Ok(out)
}

/// Sorted union alphabet of several parsed files.
fn union_alphabet(files: &[Vec<RawRow>]) -> Result<Arc<Alphabet>> {
    let mut xs = BTreeSet::new();
    let (mut y1, mut y2) = (BTreeSet::new(), BTreeSet::new());
    for r in files.iter().flatten() {
        xs.insert(r.x.clone());
        // -0 and 0 are one level
        y1.extend(r.y1.map(|v| OrdF64(v + 0.0)));
        y2.extend(r.y2.map(|v| OrdF64(v + 0.0)));
    }
    let levels = |vals: BTreeSet<OrdF64>| -> Vec<Level> {
        // no observations at all: one placeholder level keeps the alphabet valid
        if vals.is_empty() {
            return vec![Level::new("0", 0.0)];
        }
        vals.into_iter().map(|v| Level::new(fmt_num(v.0), v.0)).collect()
    };
    Ok(Arc::new(Alphabet::new(xs.into_iter().collect(), levels(y1), levels(y2))?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn index_of(levels: &[Level], v: f64) -> usize {
    levels.iter().position(|l| l.value == v + 0.0).expect("value was collected into the alphabet")
}

fn build(alphabet: &Arc<Alphabet>, raw: Vec<RawRow>) -> Result<SampleSet> {
    let mut rows = Vec::with_capacity(raw.len());
    for r in raw {
        let row = SampleRow {
            period: r.period,
            x: alphabet.x_index(&r.x).expect("label was collected into the alphabet"),
            y1: r.y1.map(|v| index_of(alphabet.y1_levels(), v)),
            y2: r.y2.map(|v| index_of(alphabet.y2_levels(), v)),
        };
        row.check_pattern().map_err(|reason| Error::SchemaViolation { line: r.line, reason })?;
        rows.push(row);
    }
    Ok(SampleSet::from_rows_unchecked(alphabet.clone(), rows))
}

/// Parses one CSV stream into a sample set with its own alphabet: covariate
/// labels sorted as strings, outcome levels sorted by value.
pub fn read_dataset<R: Read>(reader: R) -> Result<SampleSet> {
    let raw = parse_rows(reader)?;
    let alphabet = union_alphabet(std::slice::from_ref(&raw))?;
    build(&alphabet, raw)
}

pub fn load_dataset(path: &Path) -> Result<SampleSet> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_dataset(std::io::BufReader::new(f)).map_err(|e| with_path(e, path))
}

/// Loads several files onto one shared alphabet, so their rows can be
/// combined and their predictions compared.
pub fn load_datasets(paths: &[&Path]) -> Result<Vec<SampleSet>> {
    let mut raws = Vec::with_capacity(paths.len());
    for p in paths {
        let f = std::fs::File::open(p).map_err(|e| io_err(p, e))?;
        raws.push(parse_rows(std::io::BufReader::new(f)).map_err(|e| with_path(e, p))?);
    }
    let alphabet = union_alphabet(&raws)?;
    raws.into_iter().zip(paths).map(|(raw, p)| build(&alphabet, raw).map_err(|e| with_path(e, p))).collect()
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::ParseError { line, message } => Error::ParseError { line, message: format!("{}: {message}", path.display()) },
        Error::SchemaViolation { line, reason } => Error::SchemaViolation { line, reason: format!("{}: {reason}", path.display()) },
        other => other,
    }
}

/// Writes outcome values (not level labels) so that [`read_dataset`] can
/// read the file back.
pub fn write_dataset<W: Write>(samples: &SampleSet, w: W) -> Result<()> {
    let a = samples.alphabet();
    let mut wtr = csv::Writer::from_writer(w);
    let conv = |e: csv::Error| Error::Io(e.to_string());
    wtr.write_record(HEADER).map_err(conv)?;
    for r in samples.rows() {
        let y1 = r.y1.map(|i| fmt_num(a.y1_value(i))).unwrap_or_default();
        let y2 = r.y2.map(|i| fmt_num(a.y2_value(i))).unwrap_or_default();
        wtr.write_record([r.period.to_string(), a.x_labels()[r.x].clone(), y1, y2]).map_err(conv)?;
    }
    wtr.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn save_dataset(samples: &SampleSet, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_dataset(samples, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<SampleSet> {
        read_dataset(s.as_bytes())
    }

    #[test]
    fn accepts_each_period_pattern() {
        let s = read("period,x,y1,y2\n-2,a,0,1\n-1,b,1,\n0,a,,\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.alphabet().x_labels(), ["a", "b"]);
        assert_eq!(s.rows()[2].y1, None);
    }

    #[test]
    fn y2_in_proxy_period_is_rejected_with_line() {
        let err = read("period,x,y1,y2\n-2,a,0,1\n-1,a,0,1\n").unwrap_err();
        assert!(matches!(err, Error::SchemaViolation { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(read("period,x,y1\n"), Err(Error::ParseError { line: 1, .. })));
        assert!(matches!(read("period,x,y1,y2\n-2,a,0,1\nz,a,0,1\n"), Err(Error::ParseError { line: 3, .. })));
        assert!(matches!(read("period,x,y1,y2\n-2,a,yes,1\n"), Err(Error::ParseError { line: 2, .. })));
        assert!(matches!(read(""), Err(Error::ParseError { line: 1, .. })));
    }

    #[test]
    fn levels_sorted_by_value() {
        let s = read("period,x,y1,y2\n-2,a,2.5,1\n-2,a,-1,0\n-1,a,0.5,\n").unwrap();
        let vals: Vec<f64> = s.alphabet().y1_levels().iter().map(|l| l.value).collect();
        assert_eq!(vals, [-1.0, 0.5, 2.5]);
    }

    #[test]
    fn round_trip() {
        let s = read("period,x,y1,y2\n-2,\"a,b\",0.1,1\n-1,c,0.25,\n0,c,,\n").unwrap();
        let mut buf = Vec::new();
        write_dataset(&s, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }
}
