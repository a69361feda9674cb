//! Line-delimited JSON records.
//!
//! Every command writes one header record followed by its result records.
//! Wall-clock timings live in separate `timing` records, written only when
//! asked for, so the remaining lines are a deterministic function of the
//! invocation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use scor::objectives::CutPoints;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Header(Header),
    Fit(MethodFit),
    FitSummary(FitSummary),
    Cell(Cell),
    Bench(BenchRow),
    Screen(ScreenResult),
    Timing(Timing),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub command: String,
    pub version: String,
    pub rng: String,
    pub seed_derivation: String,
    pub config: serde_json::Value,
}

impl Header {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Header {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: scor::simgen::RNG_NAME.into(),
            seed_derivation: scor::simgen::SEED_DERIVATION.into(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub value: f64,
}

/// Quality of one combining vector on one data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub ehum: f64,
    pub ulba_pa: f64,
    pub ulba_pm: f64,
    /// Absent when the combination gives every subject the same score.
    pub cutpoints: Option<CutPoints>,
    pub mean_youden: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFit {
    pub method: String,
    pub objective: String,
    /// Unit-norm coefficients on the features the method uses.
    pub coefficients: Vec<Coefficient>,
    /// Objective value reached on the fitting data.
    pub objective_value: f64,
    pub train: Metrics,
    pub test: Option<Metrics>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub best_method: String,
    /// Which data set `best_method` was chosen on.
    pub chosen_on: String,
    pub random_guess_hum: f64,
    pub classes: usize,
    pub markers: usize,
    pub class_sizes: Vec<usize>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub scenario: u8,
    pub classes: usize,
    pub d: usize,
    pub n_per_class: Vec<usize>,
    pub method: String,
    pub objective: String,
    pub replications: usize,
    pub mean_test_ehum: f64,
    pub sd_test_ehum: f64,
    pub se_test_ehum: f64,
    pub per_replication: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub preset: String,
    pub d: usize,
    pub method: String,
    pub best_value: f64,
    pub target: f64,
    pub gap: f64,
    pub evaluations: usize,
    pub starts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub name: String,
    pub mean_abs_correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub threshold: f64,
    pub kept: Vec<String>,
    pub removed: Vec<Removal>,
    pub max_abs_correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub label: String,
    pub wall_ms: f64,
}

pub fn to_lines(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_lines(text: &str) -> std::result::Result<Vec<Record>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

/// The lines of a report with timing records removed.
pub fn canonical(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with(r#"{"record":"timing""#))
        .flat_map(|l| [l, "\n"])
        .collect()
}

pub fn write(path: &Path, records: &[Record]) -> Result<()> {
    std::fs::write(path, to_lines(records)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<Record> {
        vec![
            Record::Header(Header::new("fit", serde_json::json!({"seed": 1}))),
            Record::Fit(MethodFit {
                method: "SCOR".into(),
                objective: "EHUM".into(),
                coefficients: vec![
                    Coefficient { name: "a".into(), value: 0.1 + 0.2 },
                    Coefficient { name: "b".into(), value: -(1.0 - 0.09f64).sqrt() },
                ],
                objective_value: 2.0 / 3.0,
                train: Metrics {
                    ehum: 2.0 / 3.0,
                    ulba_pa: 0.7,
                    ulba_pm: 1e-300,
                    cutpoints: Some(CutPoints { thresholds: vec![0.5], youden_values: vec![1.0 / 7.0], monotone: true }),
                    mean_youden: Some(1.0 / 7.0),
                },
                test: None,
                best: true,
            }),
            Record::Timing(Timing { label: "SCOR".into(), wall_ms: 1.25 }),
        ]
    }

    #[test]
    fn lines_parse_back_losslessly() {
        let records = sample_records();
        assert_eq!(parse_lines(&to_lines(&records)).unwrap(), records);
    }

    #[test]
    fn canonical_drops_only_timings() {
        let text = to_lines(&sample_records());
        let canon = canonical(&text);
        assert_eq!(canon.lines().count(), 2);
        assert!(!canon.contains("wall_ms"));
        assert_eq!(canonical(&canon), canon);
    }
}
