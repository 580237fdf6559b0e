//! CSV readers and writers. Point files carry a mandatory header `f1,...,fm`.

use std::io::{Read, Write};
use std::path::Path;

use crate::CliError;

/// Parsed point file. `dim` is `None` only for a completely empty file.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFile {
    pub dim: Option<usize>,
    pub points: Vec<Vec<f64>>,
}

pub fn read_points(path: &Path) -> Result<PointFile, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::parse(format!("cannot open {}: {e}", path.display())))?;
    parse_points(file).map_err(|e| CliError::parse(format!("{}: {}", path.display(), e.message)))
}

pub fn parse_points<R: Read>(input: R) -> Result<PointFile, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| CliError::parse(format!("line 1: {e}")))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Ok(PointFile { dim: None, points: Vec::new() });
    }
    for (j, name) in header.iter().enumerate() {
        if name != format!("f{}", j + 1) {
            return Err(CliError::parse(format!("line 1: expected header column `f{}`, found `{name}`", j + 1)));
        }
    }
    let m = header.len();
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::parse(format!("malformed row: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != m {
            return Err(CliError::parse(format!("line {line}: expected {m} fields, found {}", rec.len())));
        }
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::parse(format!("line {line}: not a finite number")))?;
        points.push(row);
    }
    Ok(PointFile { dim: Some(m), points })
}

/// Shortest round-trip decimal for every value.
pub fn write_points<W: Write>(out: W, m: usize, points: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=m).map(|j| format!("f{j}")))?;
    for p in points {
        w.write_record(p.iter().map(|v| v.to_string()))?;
    }
    Ok(w.flush()?)
}

pub fn create(path: &Path) -> Result<std::fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::File::create(path)?)
}
