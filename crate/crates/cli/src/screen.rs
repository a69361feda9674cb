//! Greedy correlation screening.
//!
//! While some pair of remaining markers has `|r| >= threshold`, the marker
//! with the highest mean `|r|` against the other remaining markers is
//! dropped. Ties go to the earlier column. Correlations are Pearson over all
//! rows pooled across classes; a constant column correlates 0 with
//! everything.

use crate::cli::ScreenArgs;
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::report::{self, Header, Record, Removal, ScreenResult};

pub fn correlation_matrix(ds: &Dataset) -> Vec<Vec<f64>> {
    let d = ds.dim();
    let n = ds.rows.len() as f64;
    let means: Vec<f64> = (0..d).map(|k| ds.rows.iter().map(|r| r.1[k]).sum::<f64>() / n).collect();
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|k| ds.rows.iter().map(|r| r.1[k] - means[k]).collect())
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut r = vec![vec![0.0; d]; d];
    for a in 0..d {
        r[a][a] = 1.0;
        for b in a + 1..d {
            let v = if norms[a] > 0.0 && norms[b] > 0.0 {
                let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
                (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            r[a][b] = v;
            r[b][a] = v;
        }
    }
    r
}

/// Indices of the kept columns and the removals in order.
pub fn screen(corr: &[Vec<f64>], threshold: f64) -> (Vec<usize>, Vec<(usize, f64)>) {
    let mut kept: Vec<usize> = (0..corr.len()).collect();
    let mut removed = Vec::new();
    loop {
        let worst = max_abs_offdiag(corr, &kept);
        if worst < threshold || kept.len() < 2 {
            break;
        }
        let mean_abs = |a: usize| {
            kept.iter().filter(|&&b| b != a).map(|&b| corr[a][b].abs()).sum::<f64>() / (kept.len() - 1) as f64
        };
        let (pos, score) = kept
            .iter()
            .enumerate()
            .map(|(p, &a)| (p, mean_abs(a)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        removed.push((kept.remove(pos), score));
    }
    (kept, removed)
}

fn max_abs_offdiag(corr: &[Vec<f64>], cols: &[usize]) -> f64 {
    let mut m: f64 = 0.0;
    for (p, &a) in cols.iter().enumerate() {
        for &b in &cols[p + 1..] {
            m = m.max(corr[a][b].abs());
        }
    }
    m
}

pub fn cmd_screen(args: &ScreenArgs) -> Result<(Dataset, Vec<Record>)> {
    if !(args.threshold > 0.0 && args.threshold <= 1.0) {
        return Err(CliError::Config("--threshold must be in (0, 1]".into()));
    }
    let ds = Dataset::read(&args.data)?;
    let corr = correlation_matrix(&ds);
    let (kept, removed) = screen(&corr, args.threshold);
    let out = ds.select(&kept);
    let result = ScreenResult {
        threshold: args.threshold,
        kept: out.names.clone(),
        removed: removed
            .iter()
            .map(|&(k, s)| Removal { name: ds.names[k].clone(), mean_abs_correlation: s })
            .collect(),
        max_abs_correlation: max_abs_offdiag(&corr, &kept),
    };
    let config = serde_json::json!({ "data": args.data, "threshold": args.threshold, "warnings": ds.warnings });
    let records = vec![Record::Header(Header::new("screen", config)), Record::Screen(result)];
    if let Some(path) = &args.out {
        out.write(path)?;
    }
    if let Some(path) = &args.report {
        report::write(path, &records)?;
    }
    Ok((out, records))
}

pub fn render(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        if let Record::Screen(s) = r {
            for rm in &s.removed {
                out.push_str(&format!("removed {:<20} mean |r| {:.3}\n", rm.name, rm.mean_abs_correlation));
            }
            out.push_str(&format!("kept {} columns, max |r| {:.3}\n", s.kept.len(), s.max_abs_correlation));
        }
    }
    out
}
