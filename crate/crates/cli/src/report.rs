//! Experiment reports: `report.json` with config, rows, summary and timings,
//! plus `trials.csv` with one row per trial.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

pub type Row = Map<String, Value>;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub successes: u64,
    pub success_frequency: f64,
    pub wilson95: (f64, f64),
    /// Command-specific aggregates, also recomputable from the rows.
    pub details: Value,
}

impl Summary {
    /// Counts rows whose `success` field is `true`.
    pub fn from_rows(rows: &[Row], details: Value) -> Self {
        let trials = rows.len() as u64;
        let successes = rows.iter().filter(|r| r.get("success") == Some(&Value::Bool(true))).count() as u64;
        Summary {
            trials,
            successes,
            success_frequency: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            wilson95: wilson_interval(successes, trials),
            details,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub per_trial_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: crate::ExperimentConfig,
    pub rows: Vec<Row>,
    pub summary: Summary,
    /// Wall-clock data; everything outside this field is a pure function of
    /// the config.
    pub timings: Timings,
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Rows as CSV, columns in the order of the first row's keys.
pub fn rows_to_csv(rows: &[Row]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        let header: Vec<&String> = first.keys().collect();
        w.write_record(&header)?;
        for row in rows {
            w.write_record(header.iter().map(|k| row.get(*k).map(csv_cell).unwrap_or_default()))?;
        }
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

impl ExperimentReport {
    /// Writes `report.json` and `trials.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        let json = dir.join("report.json");
        let csv = dir.join("trials.csv");
        let mut body = serde_json::to_vec_pretty(self)?;
        body.push(b'\n');
        write_atomic(&json, &body)?;
        write_atomic(&csv, &rows_to_csv(&self.rows)?)?;
        Ok((json, csv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn wilson_reference_values() {
        // 8 of 10: (0.4902, 0.9433) to four places.
        let (lo, hi) = wilson_interval(8, 10);
        assert!((lo - 0.4902).abs() < 1e-4 && (hi - 0.9433).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = wilson_interval(0, 20);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.1611).abs() < 1e-4);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson_interval(50, 50);
        assert!(hi == 1.0 && lo > 0.92);
    }

    #[test]
    fn summary_counts_success_column() {
        let rows: Vec<Row> = [true, false, true]
            .iter()
            .map(|&s| json!({"trial": 0, "success": s}).as_object().unwrap().clone())
            .collect();
        let s = Summary::from_rows(&rows, Value::Null);
        assert_eq!((s.trials, s.successes), (3, 2));
        assert!((s.success_frequency - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn csv_flattens_nested_values() {
        let row = json!({"a": 1, "b": [1, 2], "c": "x,y", "d": null});
        let out = rows_to_csv(&[row.as_object().unwrap().clone()]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b,c,d\n1,\"[1,2]\",\"x,y\",\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
