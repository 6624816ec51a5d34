//! Pass/fail check reports and the bound CSV format.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::BoundReport;
use crate::error::{Error, Result};

/// First line of every bound CSV. Bump on any column change.
pub const CSV_VERSION_LINE: &str = "# riskroute-csv v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check::new(name, false, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub title: String,
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn new(title: impl Into<String>) -> Self {
        CheckReport { title: title.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: CheckReport) {
        for mut c in other.checks {
            c.name = format!("{}: {}", other.title, c.name);
            self.checks.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "  [{tag}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// One CSV row: a bound report plus instance identification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub id: String,
    pub n: usize,
    /// Recursion level, when the instance has one.
    pub i: Option<u32>,
    pub gamma: f64,
    pub kappa: f64,
    pub eta: usize,
    pub mu: Option<f64>,
    pub pra: f64,
    pub bound: f64,
    pub slack: f64,
    pub kind: String,
    /// `ok`, `violated`, `n/a`, or a solver diagnostic.
    pub status: String,
}

impl BoundRow {
    pub fn from_report(id: impl Into<String>, n: usize, i: Option<u32>, gamma: f64, r: &BoundReport) -> Self {
        let status = if !r.applicable {
            "n/a"
        } else if r.satisfied {
            "ok"
        } else {
            "violated"
        };
        BoundRow {
            id: id.into(),
            n,
            i,
            gamma,
            kappa: r.kappa,
            eta: r.eta,
            mu: r.mu,
            pra: r.pra_observed,
            bound: r.bound_value,
            slack: r.slack,
            kind: r.bound_kind.to_string(),
            status: status.into(),
        }
    }
}

pub fn write_bound_csv<W: Write>(mut out: W, rows: &[BoundRow]) -> Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(["id", "n", "i", "gamma", "kappa", "eta", "mu", "pra", "bound", "slack", "kind", "status"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bound_csv<R: BufRead>(mut input: R) -> Result<Vec<BoundRow>> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    if first.trim_end() != CSV_VERSION_LINE {
        return Err(Error::Parameter(format!("unsupported CSV header line {:?}", first.trim_end())));
    }
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<std::result::Result<Vec<BoundRow>, _>>()?;
    Ok(rows)
}
