use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Lt => value < threshold,
            Comparison::Le => value <= threshold,
            Comparison::Gt => value > threshold,
            Comparison::Ge => value >= threshold,
        }
    }
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        })
    }
}

/// A declared threshold and whether the observed value meets it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> Self {
        Check { name: name.into(), value, comparison, threshold, pass: comparison.holds(value, threshold) }
    }
}

/// Per-replication values of one cell, one row per replication in index order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RawTable {
    pub fn new(columns: &[&str]) -> Self {
        RawTable { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub params: BTreeMap<String, Value>,
    pub replications: usize,
    pub aggregates: BTreeMap<String, f64>,
    pub threshold: Vec<Check>,
    pub pass: bool,
    #[serde(skip)]
    pub raw: RawTable,
}

impl CellReport {
    pub fn new(params: BTreeMap<String, Value>, raw: RawTable) -> Self {
        CellReport {
            params,
            replications: raw.rows.len(),
            aggregates: BTreeMap::new(),
            threshold: Vec::new(),
            pass: true,
            raw,
        }
    }

    pub fn aggregate(&mut self, name: &str, value: f64) -> &mut Self {
        self.aggregates.insert(name.to_string(), value);
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.pass &= check.pass;
        self.threshold.push(check);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub pass: bool,
    pub cells: Vec<CellReport>,
    /// Checks that span several cells, such as trends along a grid.
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, cells: Vec<CellReport>, checks: Vec<Check>) -> Self {
        let pass = cells.iter().all(|c| c.pass) && checks.iter().all(|c| c.pass);
        ExperimentReport { experiment: experiment.to_string(), seed, pass, cells, checks }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// All per-replication rows as CSV, prefixed with the cell index.
    pub fn raw_csv(&self) -> String {
        let mut out = String::new();
        let columns = self.cells.iter().map(|c| &c.raw.columns).find(|c| !c.is_empty());
        let mut header = vec!["cell".to_string()];
        if let Some(cols) = columns {
            header.extend(cols.iter().cloned());
        }
        out.push_str(&header.join(","));
        out.push('\n');
        for (i, cell) in self.cells.iter().enumerate() {
            for row in &cell.raw.rows {
                write!(out, "{i}").unwrap();
                for v in row {
                    write!(out, ",{v}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }
}

pub(crate) fn params<const N: usize>(entries: [(&str, Value); N]) -> BTreeMap<String, Value> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
