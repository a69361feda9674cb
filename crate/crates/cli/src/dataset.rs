//! Labeled marker tables in CSV form.
//!
//! The first column holds the class label (an integer in `0..M`), every
//! other column a numeric marker. A header row is required; fields are
//! comma-separated with `.` as the decimal mark.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use scor::MulticlassSample;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub path: PathBuf,
    pub label_name: String,
    pub names: Vec<String>,
    /// `(label, markers)` in file order.
    pub rows: Vec<(usize, Vec<f64>)>,
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let parse_err = |line: u64, column: &str, message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            column: column.to_string(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| parse_err(1, "", e.to_string()))?
            .clone();
        if header.len() < 2 || header.iter().all(str::is_empty) {
            return Err(parse_err(1, "", "header needs a label column and at least one marker".into()));
        }
        let label_name = header[0].to_string();
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, "", e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let label: usize = record[0]
                .parse()
                .map_err(|_| parse_err(line, &label_name, format!("label '{}' is not a non-negative integer", &record[0])))?;
            let mut values = Vec::with_capacity(names.len());
            for (k, name) in names.iter().enumerate() {
                let field = &record[k + 1];
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(line, name, format!("'{field}' is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(line, name, format!("'{field}' is not finite")));
                }
                values.push(v);
            }
            rows.push((label, values));
        }
        if rows.is_empty() {
            return Err(parse_err(1, "", "no data rows".into()));
        }

        let mut ds = Dataset { path: path.to_path_buf(), label_name, names, rows, warnings: Vec::new() };
        ds.check_classes()?;
        ds.warnings = ds.constant_column_warnings();
        Ok(ds)
    }

    fn check_classes(&self) -> Result<()> {
        let m = self.num_classes();
        let mut seen = vec![false; m];
        for &(label, _) in &self.rows {
            seen[label] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(CliError::ClassGap { path: self.path.clone(), missing, classes: m });
        }
        if m < 2 {
            return Err(CliError::Config(format!("{}: need at least 2 classes", self.path.display())));
        }
        Ok(())
    }

    fn constant_column_warnings(&self) -> Vec<String> {
        (0..self.dim())
            .filter(|&k| self.rows.iter().all(|r| r.1[k] == self.rows[0].1[k]))
            .map(|k| format!("constant column '{}'", self.names[k]))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1)
    }

    /// Relabels rows through `map` (old label to new label), then rechecks
    /// that the new labels cover `0..M`.
    pub fn merge_labels(&mut self, map: &BTreeMap<usize, usize>) -> Result<()> {
        for row in &mut self.rows {
            if let Some(&to) = map.get(&row.0) {
                row.0 = to;
            }
        }
        self.check_classes()
    }

    pub fn sample(&self) -> Result<MulticlassSample> {
        let mut classes = vec![Vec::new(); self.num_classes()];
        for (label, values) in &self.rows {
            classes[*label].extend_from_slice(values);
        }
        Ok(MulticlassSample::from_flat(self.dim(), classes)?)
    }

    /// Keeps only the given marker columns, in the given order.
    pub fn select(&self, cols: &[usize]) -> Dataset {
        Dataset {
            path: self.path.clone(),
            label_name: self.label_name.clone(),
            names: cols.iter().map(|&k| self.names[k].clone()).collect(),
            rows: self.rows.iter().map(|(l, v)| (*l, cols.iter().map(|&k| v[k]).collect())).collect(),
            warnings: Vec::new(),
        }
    }

    /// CSV text; values use the shortest representation that parses back
    /// to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.label_name);
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (label, values) in &self.rows {
            write!(out, "{label}").unwrap();
            for v in values {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::io(path, e))
    }

    /// Table form of a sample; markers are named `x1..xd`.
    pub fn from_sample(sample: &MulticlassSample) -> Dataset {
        let rows = (0..sample.num_classes())
            .flat_map(|j| sample.rows(j).map(move |r| (j, r.to_vec())))
            .collect();
        Dataset {
            path: PathBuf::new(),
            label_name: "class".into(),
            names: (1..=sample.dim()).map(|k| format!("x{k}")).collect(),
            rows,
            warnings: Vec::new(),
        }
    }
}

/// Parses `old:new,old:new,...`.
pub fn parse_label_map(text: &str) -> Result<BTreeMap<usize, usize>> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (from, to) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("label mapping '{pair}' is not of the form old:new")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("label mapping '{pair}' has a non-integer label")))
            };
            Ok((num(from)?, num(to)?))
        })
        .collect()
}
