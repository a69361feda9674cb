use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scor::ScorConfig;

use crate::error::{CliError, Result};

/// Worker-count override read at startup.
pub const THREADS_ENV: &str = "SCOR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "scor", version, about = "Optimize biomarker combinations on the unit sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit combining vectors to a labeled CSV file.
    Fit(FitArgs),
    /// Replicate the simulation scenarios and report mean test EHUM.
    Simulate(SimulateArgs),
    /// Compare optimizers on built-in analytic objectives.
    Bench(BenchArgs),
    /// Drop markers greedily until all pairwise correlations are small.
    Screen(ScreenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Ehum,
    Ulba,
}

impl From<ObjectiveArg> for scor::ObjectiveKind {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Ehum => scor::ObjectiveKind::Ehum,
            ObjectiveArg::Ulba => scor::ObjectiveKind::Ulba,
        }
    }
}

/// Algorithm knobs shared by every command that runs the optimizer.
#[derive(Debug, Clone, Args)]
pub struct ScorArgs {
    /// Sparsity threshold.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long)]
    pub s_initial: Option<f64>,
    /// Step decay rate.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Step threshold ending a run.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub tol_fun: Option<f64>,
    #[arg(long)]
    pub tol_fun_2: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub max_runs: Option<usize>,
}

impl ScorArgs {
    pub fn config(&self) -> Result<ScorConfig> {
        let d = ScorConfig::default();
        let cfg = ScorConfig {
            lambda: self.lambda,
            s_initial: self.s_initial.unwrap_or(d.s_initial),
            rho: self.rho.unwrap_or(d.rho),
            phi: self.phi.unwrap_or(d.phi),
            tol_fun: self.tol_fun.unwrap_or(d.tol_fun),
            tol_fun_2: self.tol_fun_2.unwrap_or(d.tol_fun_2),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            max_runs: self.max_runs.unwrap_or(d.max_runs),
            parallel_eval: d.parallel_eval,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out file scored with the fitted vectors; the best method is
    /// chosen on it when given.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ehum")]
    pub objective: ObjectiveArg,
    /// scor, nm, stepdown, minmax or all (comma-separated).
    #[arg(long, default_value = "all")]
    pub method: String,
    /// Seeds the extra random starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optimizer starts: the uniform vector plus `starts - 1` random ones.
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    /// Relabel classes before fitting, e.g. `2:1,3:1,4:1`.
    #[arg(long)]
    pub merge_labels: Option<String>,
    #[command(flatten)]
    pub scor: ScorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write wall-clock timing records.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub scenario: u8,
    /// Number of classes.
    #[arg(long = "M", default_value_t = 2)]
    pub classes: usize,
    /// Marker counts, one cell per value.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
    /// Per-class sample sizes; a single value is used for every class.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// scor, nm, stepdown, minmax or all (comma-separated).
    #[arg(long, default_value = "all")]
    pub method: String,
    /// ehum, ulba or both (comma-separated).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ehum")]
    pub objective: Vec<ObjectiveArg>,
    #[command(flatten)]
    pub scor: ScorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// `beta_1`, minimum -1.
    Linear,
    /// `sum_k beta_k`, minimum `-sqrt(d)`.
    Symmetric,
    /// `sum_k (d - k + 1) beta_k^2`, minimum 1.
    Quadratic,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// scor, nm, random or all (comma-separated).
    #[arg(long, default_value = "all")]
    pub method: String,
    #[command(flatten)]
    pub scor: ScorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub threshold: f64,
    /// CSV with the retained columns.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Structured record of what was removed.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Splits a comma-separated list, expanding `all`; an empty list is an error.
pub fn parse_list<T: Copy>(text: &str, all: &[T], lookup: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            out.extend_from_slice(all);
        } else {
            out.push(lookup(&item.to_ascii_lowercase()).ok_or_else(|| CliError::Config(format!("unknown method '{item}'")))?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("empty method list".into()));
    }
    Ok(out)
}

pub fn parse_methods(text: &str) -> Result<Vec<scor::baselines::Method>> {
    use scor::baselines::Method;
    let all = [Method::Scor, Method::NelderMead, Method::StepDown, Method::MinMax];
    let mut methods = parse_list(text, &all, |s| match s {
        "scor" => Some(Method::Scor),
        "nm" => Some(Method::NelderMead),
        "stepdown" | "step-down" => Some(Method::StepDown),
        "minmax" | "min-max" => Some(Method::MinMax),
        _ => None,
    })?;
    dedup_in_order(&mut methods);
    Ok(methods)
}

pub(crate) fn dedup_in_order<T: PartialEq + Copy>(v: &mut Vec<T>) {
    let mut seen = Vec::new();
    v.retain(|x| {
        if seen.contains(x) {
            false
        } else {
            seen.push(*x);
            true
        }
    });
}
