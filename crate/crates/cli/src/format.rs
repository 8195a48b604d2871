//! File formats: 17-significant-digit CSV, pretty JSON, `x,y` input tables
//! and `#`-headed sample files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use slsm_core::Dataset;

use crate::error::CliError;

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn floats(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| float(*v)).collect()
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("csv encoding failed: {e}"));
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        writer.write_record(row).map_err(csv_err)?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv encoding failed: {e}")))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports contain only serializable data");
    bytes.push(b'\n');
    bytes
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(CliError::io(p)),
        None => std::io::stdout().write_all(bytes).map_err(CliError::io("<stdout>")),
    }
}

/// Reads two numeric columns `x,y`. A first row that does not parse as
/// numbers is taken as a header.
pub fn read_xy_csv(path: &Path) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(CliError::Usage(format!(
                "{}: row {} has {} fields, expected x,y",
                path.display(),
                line + 1,
                record.len()
            )));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push((x, y)),
            _ if line == 0 => continue,
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    Ok(Dataset::from_points(points)?)
}

/// Parses a sample file: `#` lines are header, every other line one value.
pub fn read_samples(text: &str) -> Result<Vec<f64>, CliError> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("`{l}` is not a number")))
        })
        .collect()
}
