//! Result tables, traces and run manifests.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sparsegrad::solvers::Diagnostics;

use crate::config::{ExperimentConfig, Method};

/// Threshold on the relative error below which a run counts as an exact recovery.
pub const EXACT_RECOVERY_RE: f64 = 1e-6;

/// One reconstruction of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub id: usize,
    pub experiment: String,
    pub method: Method,
    /// Instance descriptor as ordered `(column, value)` pairs.
    pub instance: Vec<(String, String)>,
    pub re: f64,
    pub psnr: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub diverged: bool,
    pub seconds: f64,
}

impl ResultRow {
    pub fn exact_recovery(&self) -> bool {
        self.re < EXACT_RECOVERY_RE
    }

    pub fn get(&self, column: &str) -> Option<&str> {
        self.instance.iter().find(|(k, _)| k == column).map(|(_, v)| v.as_str())
    }

    /// Numeric instance value, panicking if missing. For table queries in tests and reports.
    pub fn num(&self, column: &str) -> f64 {
        self.get(column).and_then(|v| v.parse().ok()).unwrap_or_else(|| panic!("row has no numeric column {column}"))
    }
}

/// Per-run solver traces, written as `trace_<id>.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub id: usize,
    pub method: Method,
    pub instance: Vec<(String, String)>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub traces: Vec<Trace>,
}

impl Outcome {
    pub fn select(&self, method: Method) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

/// Column name of the wall-time column, the only nondeterministic one.
pub const TIMING_COLUMN: &str = "seconds";

pub fn header(rows: &[ResultRow]) -> Vec<String> {
    let mut h = vec!["id".to_string(), "method".to_string()];
    if let Some(r) = rows.first() {
        h.extend(r.instance.iter().map(|(k, _)| k.clone()));
    }
    for c in ["re", "psnr", "exact_recovery", "iters", "inner_iters", "diverged", TIMING_COLUMN] {
        h.push(c.to_string());
    }
    h
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(rows))?;
    for r in rows {
        let mut rec = vec![r.id.to_string(), r.method.name().to_string()];
        rec.extend(r.instance.iter().map(|(_, v)| v.clone()));
        rec.push(r.re.to_string());
        rec.push(r.psnr.to_string());
        rec.push(r.exact_recovery().to_string());
        rec.push(r.outer_iterations.to_string());
        rec.push(r.inner_iterations.to_string());
        rec.push(r.diverged.to_string());
        rec.push(format!("{:.3}", r.seconds));
        out.write_record(rec)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.kind.name().to_string(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        m.config.validate()?;
        Ok(m)
    }
}

/// Writes `results.csv`, one `trace_<id>.json` per trace and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv_buf = Vec::new();
    write_csv(&outcome.rows, &mut csv_buf)?;
    fs::write(dir.join("results.csv"), csv_buf).context("writing results.csv")?;
    for t in &outcome.traces {
        let path = dir.join(format!("trace_{}.json", t.id));
        fs::write(&path, serde_json::to_vec(t)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let manifest = serde_json::to_vec_pretty(&Manifest::new(config))?;
    fs::write(dir.join("manifest.json"), manifest).context("writing manifest.json")?;
    Ok(())
}

/// Drops the timing column from CSV text so that runs can be compared.
pub fn strip_timing(csv_text: &str) -> Result<String> {
    let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rd.headers()?.clone();
    let keep: Vec<usize> = (0..headers.len()).filter(|&i| &headers[i] != TIMING_COLUMN).collect();
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(keep.iter().map(|&i| &headers[i]))?;
    for rec in rd.records() {
        let rec = rec?;
        out.write_record(keep.iter().map(|&i| &rec[i]))?;
    }
    Ok(String::from_utf8(out.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(re: f64) -> ResultRow {
        ResultRow {
            id: 3,
            experiment: "onebar".into(),
            method: Method::Tv,
            instance: vec![("s".into(), "20".into())],
            re,
            psnr: 80.0,
            outer_iterations: 10,
            inner_iterations: 50,
            diverged: false,
            seconds: 0.25,
        }
    }

    #[test]
    fn csv_schema() {
        let mut buf = Vec::new();
        write_csv(&[row(1e-9), row(0.5)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "id,method,s,re,psnr,exact_recovery,iters,inner_iters,diverged,seconds");
        assert_eq!(lines.next().unwrap(), "3,tv,20,0.000000001,80,true,10,50,false,0.250");
        assert!(lines.next().unwrap().contains(",false,"));
        let stripped = strip_timing(&text).unwrap();
        assert!(!stripped.contains("seconds") && !stripped.contains("0.250"));
    }

    #[test]
    fn exact_recovery_threshold() {
        assert!(row(9.99e-7).exact_recovery());
        assert!(!row(1e-6).exact_recovery());
        assert_eq!(row(0.0).num("s"), 20.0);
    }
}
