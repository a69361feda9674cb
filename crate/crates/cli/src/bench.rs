use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use scor::baselines::{nelder_mead_estimate, BaselineDetail, NelderMeadOptions};
use scor::optimizer::{multistart, FnObjective, Negated, Objective};
use scor::{ScorConfig, UnitVector};

use crate::cli::{dedup_in_order, parse_list, BenchArgs, Preset};
use crate::error::{CliError, Result};
use crate::report::{self, BenchRow, Header, Record, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    Scor,
    NelderMead,
    /// Best of uniformly random points, as many as SCOR evaluated.
    RandomSearch,
}

impl BenchMethod {
    pub fn label(self) -> &'static str {
        match self {
            BenchMethod::Scor => "SCOR",
            BenchMethod::NelderMead => "NM",
            BenchMethod::RandomSearch => "random",
        }
    }
}

pub fn parse_bench_methods(text: &str) -> Result<Vec<BenchMethod>> {
    let all = [BenchMethod::Scor, BenchMethod::NelderMead, BenchMethod::RandomSearch];
    let mut m = parse_list(text, &all, |s| match s {
        "scor" => Some(BenchMethod::Scor),
        "nm" => Some(BenchMethod::NelderMead),
        "random" => Some(BenchMethod::RandomSearch),
        _ => None,
    })?;
    dedup_in_order(&mut m);
    Ok(m)
}

impl Preset {
    pub fn label(self) -> &'static str {
        match self {
            Preset::Linear => "linear",
            Preset::Symmetric => "symmetric",
            Preset::Quadratic => "quadratic",
        }
    }

    pub fn evaluate(self, beta: &[f64]) -> f64 {
        let d = beta.len();
        match self {
            Preset::Linear => beta[0],
            Preset::Symmetric => beta.iter().sum(),
            Preset::Quadratic => beta.iter().enumerate().map(|(k, b)| (d - k) as f64 * b * b).sum(),
        }
    }

    /// Known minimum over the sphere.
    pub fn target(self, d: usize) -> f64 {
        match self {
            Preset::Linear => -1.0,
            Preset::Symmetric => -(d as f64).sqrt(),
            Preset::Quadratic => 1.0,
        }
    }
}

/// Minimizes the preset with each method; SCOR's evaluation count sets the
/// random-search budget.
pub fn bench_preset(
    preset: Preset,
    d: usize,
    methods: &[BenchMethod],
    starts: usize,
    seed: u64,
    cfg: &ScorConfig,
) -> Result<Vec<(BenchRow, f64)>> {
    if methods.is_empty() {
        return Err(CliError::Config("empty method list".into()));
    }
    if starts == 0 {
        return Err(CliError::Config("--starts must be at least 1".into()));
    }
    let f = FnObjective::new(d, move |b: &[f64]| preset.evaluate(b));
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points = vec![UnitVector::uniform(d)?];
    for _ in 1..starts {
        points.push(UnitVector::random(d, &mut rng)?);
    }

    let mut scor_evals = None;
    let mut rows = Vec::new();
    for &m in methods {
        let clock = Instant::now();
        let (value, evaluations, used_starts) = match m {
            BenchMethod::Scor => {
                let res = multistart(&f, &points, cfg)?;
                scor_evals = Some(res.evaluations);
                (res.objective_value, res.evaluations, starts)
            }
            BenchMethod::NelderMead => {
                let res = nelder_mead_estimate(&Negated(&f), None, &NelderMeadOptions::default())?;
                let evals = match res.detail {
                    BaselineDetail::NelderMead { evaluations, .. } => evaluations,
                    _ => 0,
                };
                (-res.objective_value, evals, 1)
            }
            BenchMethod::RandomSearch => {
                let budget = match scor_evals {
                    Some(n) => n,
                    None => multistart(&f, &points, cfg)?.evaluations,
                };
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
                let mut best = f64::INFINITY;
                for _ in 0..budget {
                    best = best.min(f.evaluate(&UnitVector::random(d, &mut rng)?));
                }
                (best, budget, 1)
            }
        };
        let target = preset.target(d);
        rows.push((
            BenchRow {
                preset: preset.label().into(),
                d,
                method: m.label().into(),
                best_value: value,
                target,
                gap: value - target,
                evaluations,
                starts: used_starts,
            },
            clock.elapsed().as_secs_f64() * 1e3,
        ));
    }
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<Record>> {
    let cfg = args.scor.config()?;
    let methods = parse_bench_methods(&args.method)?;
    let config = serde_json::json!({
        "preset": args.preset.label(),
        "d": args.d,
        "starts": args.starts,
        "seed": args.seed,
        "methods": methods.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "scor": cfg,
    });
    let mut records = vec![Record::Header(Header::new("bench", config))];
    let mut timings = Vec::new();
    for &d in &args.d {
        for (row, ms) in bench_preset(args.preset, d, &methods, args.starts, args.seed, &cfg)? {
            timings.push(Timing { label: format!("{} d={d}", row.method), wall_ms: ms });
            records.push(Record::Bench(row));
        }
    }
    if args.timings {
        records.extend(timings.into_iter().map(Record::Timing));
    }
    if let Some(out) = &args.out {
        report::write(out, &records)?;
    }
    Ok(records)
}

pub fn render(records: &[Record]) -> String {
    let mut out = format!(
        "{:<10} {:>4} {:<7} {:>14} {:>14} {:>11} {:>7}\n",
        "preset", "d", "method", "best", "target", "gap", "evals"
    );
    for r in records {
        if let Record::Bench(b) = r {
            out.push_str(&format!(
                "{:<10} {:>4} {:<7} {:>14.8} {:>14.8} {:>11.2e} {:>7}\n",
                b.preset, b.d, b.method, b.best_value, b.target, b.gap, b.evaluations
            ));
        }
    }
    out
}
