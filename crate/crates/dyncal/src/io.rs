//! CSV and JSON file formats.
//!
//! Series files have the header `t,value`; input files have `x1,...,xd`.
//! Floats are written with 17 significant digits so every value survives a
//! round trip bit for bit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dyncal_core::TargetSeries;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: line {line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
}

impl IoError {
    fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File { path: path.to_path_buf(), source }
    }

    fn parse(path: &Path, line: u64, message: impl Into<String>) -> Self {
        IoError::Parse { path: path.to_path_buf(), line, message: message.into() }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, IoError> {
    let file = fs::File::open(path).map_err(|e| IoError::file(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).flexible(true).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::file(path, source),
        kind => IoError::parse(path, line, format!("{kind:?}")),
    }
}

/// Reads a `t,value` file into its two columns.
pub fn read_series_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_owned).collect();
    if header != ["t", "value"] {
        return Err(IoError::parse(path, 1, format!("expected header `t,value`, found `{}`", header.join(","))));
    }
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(IoError::parse(path, line, format!("expected 2 fields, found {}", rec.len())));
        }
        match (parse_f64(&rec[0]), parse_f64(&rec[1])) {
            (Some(a), Some(b)) => {
                t.push(a);
                v.push(b);
            }
            _ => return Err(IoError::parse(path, line, format!("not a finite number pair: `{},{}`", &rec[0], &rec[1]))),
        }
    }
    Ok((t, v))
}

pub fn read_series(path: &Path) -> Result<TargetSeries, IoError> {
    let (t, v) = read_series_columns(path)?;
    TargetSeries::new(t, v).map_err(|e| IoError::parse(path, 0, e.to_string()))
}

pub fn write_series(path: &Path, times: &[f64], values: &[f64]) -> Result<(), IoError> {
    let mut out = String::from("t,value\n");
    for (t, v) in times.iter().zip(values) {
        out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*v)));
    }
    write_text(path, &out)
}

/// Reads an `x1,...,xd` file. A file with no rows (or no content at all)
/// yields zero points; `d` is then taken from the header, or zero.
pub fn read_inputs(path: &Path) -> Result<(usize, Vec<Vec<f64>>), IoError> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let d = header.len();
    if d > 0 && !(header.len() == 1 && header[0].is_empty()) {
        for (j, h) in header.iter().enumerate() {
            if h != format!("x{}", j + 1) {
                return Err(IoError::parse(path, 1, format!("expected column `x{}`, found `{h}`", j + 1)));
            }
        }
    } else {
        return Ok((0, Vec::new()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != d {
            return Err(IoError::parse(path, line, format!("expected {d} fields, found {}", rec.len())));
        }
        let row: Option<Vec<f64>> = rec.iter().map(parse_f64).collect();
        rows.push(row.ok_or_else(|| IoError::parse(path, line, "non-numeric or non-finite value"))?);
    }
    Ok((d, rows))
}

pub fn write_inputs(path: &Path, d: usize, rows: &[Vec<f64>]) -> Result<(), IoError> {
    let mut out = (1..=d).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

/// Writes an `L x m` response matrix with a leading time column. With no
/// series at all the file is left empty.
pub fn write_responses(path: &Path, times: &[f64], series: &[Vec<f64>]) -> Result<(), IoError> {
    if series.is_empty() {
        return write_text(path, "");
    }
    let mut out = String::from("t");
    for j in 1..=series.len() {
        out.push_str(&format!(",run{j}"));
    }
    out.push('\n');
    for (i, t) in times.iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for s in series {
            out.push(',');
            out.push_str(&fmt_f64(s[i]));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| IoError::file(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize to JSON");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::file(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), IoError> {
    fs::create_dir_all(path).map_err(|e| IoError::file(path, e))
}
