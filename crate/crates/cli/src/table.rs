//! CSV input and output. Inputs carry a header `x1,...,xd` optionally
//! followed by `y`; every cell must be a finite decimal number.

use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub d: usize,
    /// Row-major covariates.
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
}

impl Table {
    pub fn n(&self) -> usize {
        self.x.len() / self.d
    }
}

fn check_header(path: &Path, header: &csv::StringRecord) -> Result<(usize, bool)> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let has_y = names.last() == Some(&"y");
    let d = names.len() - usize::from(has_y);
    if d == 0 {
        return Err(CliError::parse(path, "line 1: header needs at least one column x1"));
    }
    for (i, name) in names[..d].iter().enumerate() {
        if *name != format!("x{}", i + 1) {
            return Err(CliError::parse(
                path,
                format!("line 1: expected header x1,...,xd[,y], found column {name:?} at position {}", i + 1),
            ));
        }
    }
    Ok((d, has_y))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path).map_err(|e| CliError::parse(path, e))?;
    let header = reader.headers().map_err(|e| CliError::parse(path, e))?.clone();
    let (d, has_y) = check_header(path, &header)?;
    let width = header.len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::parse(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(CliError::parse(path, format!("line {line}: expected {width} fields, found {}", record.len())));
        }
        for (k, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let value: f64 = match cell.parse() {
                Ok(v) if f64::is_finite(v) => v,
                _ if cell.is_empty() => {
                    return Err(CliError::parse(path, format!("line {line}: missing value in column {}", &header[k])))
                }
                _ => {
                    return Err(CliError::parse(
                        path,
                        format!("line {line}: column {}: {cell:?} is not a finite number", &header[k]),
                    ))
                }
            };
            if k < d {
                x.push(value);
            } else {
                y.push(value);
            }
        }
    }
    if x.is_empty() {
        return Err(CliError::parse(path, "no data rows"));
    }
    Ok(Table { d, x, y: has_y.then_some(y) })
}

/// One `prediction` column, each value in shortest round-trip form.
pub fn write_predictions(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(values.len() * 20 + 11);
    out.push_str("prediction\n");
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}
