//! Run/iteration pattern search on the unit sphere.
//!
//! The search is organised into runs. Every run starts from the previous
//! run's solution with the step size reset to `s_initial`; within a run each
//! iteration evaluates the `2d` exploratory moves from
//! [`generate_candidates`](crate::sphere::generate_candidates), keeps the
//! strictly best one, and divides the step size by `rho` whenever the
//! improvement falls below `tol_fun`. A run ends once the step size drops to
//! `phi` (or `max_iters` is hit) and the search stops when two consecutive
//! runs end at the same point.
//!
//! The core is a minimizer; [`scor_maximize`] negates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{generate_candidates, UnitVector};

/// A black-box function on the unit sphere.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn evaluate(&self, beta: &UnitVector) -> f64;

    /// Whether candidate evaluations may run concurrently.
    fn thread_safe(&self) -> bool {
        true
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&self, beta: &UnitVector) -> f64 {
        (**self).evaluate(beta)
    }

    fn thread_safe(&self) -> bool {
        (**self).thread_safe()
    }
}

/// Wraps a closure over the raw coordinates.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, beta: &UnitVector) -> f64 {
        (self.f)(beta.as_slice())
    }
}

/// `-f`.
pub struct Negated<O>(pub O);

impl<O: Objective> Objective for Negated<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn evaluate(&self, beta: &UnitVector) -> f64 {
        -self.0.evaluate(beta)
    }

    fn thread_safe(&self) -> bool {
        self.0.thread_safe()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorConfig {
    pub s_initial: f64,
    /// Step decay rate.
    pub rho: f64,
    /// Step size threshold ending a run.
    pub phi: f64,
    /// Sparsity threshold.
    pub lambda: f64,
    pub tol_fun: f64,
    pub tol_fun_2: f64,
    pub max_iters: usize,
    pub max_runs: usize,
    pub parallel_eval: bool,
}

impl Default for ScorConfig {
    fn default() -> Self {
        Self {
            s_initial: 1.0,
            rho: 2.0,
            phi: 1e-6,
            lambda: 0.0,
            tol_fun: 1e-6,
            tol_fun_2: 1e-12,
            max_iters: 5000,
            max_runs: 500,
            parallel_eval: true,
        }
    }
}

impl ScorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let all_finite = [self.s_initial, self.rho, self.phi, self.lambda, self.tol_fun, self.tol_fun_2]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return bad("tuning parameters must be finite");
        }
        if self.phi <= 0.0 {
            return bad("phi must be positive");
        }
        if self.s_initial <= self.phi {
            return bad("s_initial must exceed phi");
        }
        if self.rho <= 1.0 {
            return bad("rho must exceed 1");
        }
        if self.lambda < 0.0 || self.tol_fun < 0.0 || self.tol_fun_2 < 0.0 {
            return bad("lambda, tol_fun and tol_fun_2 must be non-negative");
        }
        if self.max_iters == 0 || self.max_runs == 0 {
            return bad("max_iters and max_runs must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ConsecutiveRunsConverged,
    MaxRunsReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub run: usize,
    pub iteration: usize,
    /// Step size in force during the iteration.
    pub step: f64,
    /// Incumbent value after the iteration.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorResult {
    pub solution: UnitVector,
    pub objective_value: f64,
    pub runs_executed: usize,
    pub total_iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRecord>,
}

fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Minimizes `f` over the unit sphere starting from `beta0`.
pub fn scor_minimize<O: Objective + ?Sized>(
    f: &O,
    beta0: &UnitVector,
    config: &ScorConfig,
) -> Result<ScorResult> {
    config.validate()?;
    if f.dim() != beta0.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: beta0.dim() });
    }
    let parallel = config.parallel_eval && f.thread_safe();

    let mut incumbent = beta0.clone();
    let mut value = f.evaluate(&incumbent);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective(value));
    }
    let mut evaluations = 1;
    let mut previous_run = beta0.clone();
    let mut trace = Vec::new();
    let mut total_iterations = 0;

    for run in 1..=config.max_runs {
        let mut step = config.s_initial;
        let mut j = 1;
        while j <= config.max_iters && step > config.phi {
            let before = value;
            let candidates =
                generate_candidates(&incumbent, step, config.lambda, config.rho, config.phi);
            let values: Vec<f64> = if parallel {
                candidates.par_iter().map(|c| sanitize(f.evaluate(&c.point))).collect()
            } else {
                candidates.iter().map(|c| sanitize(f.evaluate(&c.point))).collect()
            };
            evaluations += candidates.len();

            // first strict minimum in candidate order
            let mut best: Option<usize> = None;
            for (h, &v) in values.iter().enumerate() {
                if best.is_none_or(|b| v < values[b]) {
                    best = Some(h);
                }
            }
            let best_value = best.map_or(before, |b| values[b]);
            if let Some(b) = best {
                if best_value < before {
                    incumbent = candidates[b].point.clone();
                    value = best_value;
                }
            }

            let step_used = step;
            if j > 1 && (before - before.min(best_value)).abs() < config.tol_fun {
                step /= config.rho;
            }
            trace.push(TraceRecord { run, iteration: j, step: step_used, value });
            total_iterations += 1;
            j += 1;
        }

        if incumbent.distance(&previous_run) < config.tol_fun_2 {
            return Ok(ScorResult {
                solution: incumbent,
                objective_value: value,
                runs_executed: run,
                total_iterations,
                evaluations,
                termination: Termination::ConsecutiveRunsConverged,
                trace,
            });
        }
        previous_run = incumbent.clone();
    }

    Ok(ScorResult {
        solution: incumbent,
        objective_value: value,
        runs_executed: config.max_runs,
        total_iterations,
        evaluations,
        termination: Termination::MaxRunsReached,
        trace,
    })
}

/// Maximizes `f`; the reported value and trace are in the original sign.
pub fn scor_maximize<O: Objective + ?Sized>(
    f: &O,
    beta0: &UnitVector,
    config: &ScorConfig,
) -> Result<ScorResult> {
    let mut res = scor_minimize(&Negated(f), beta0, config)?;
    res.objective_value = -res.objective_value;
    for rec in &mut res.trace {
        rec.value = -rec.value;
    }
    Ok(res)
}

/// Runs [`scor_minimize`] from every start and keeps the lowest value.
///
/// Ties go to the earliest start. An error is returned only if every start
/// fails, in which case the first error is reported.
pub fn multistart<O: Objective + ?Sized>(
    f: &O,
    starts: &[UnitVector],
    config: &ScorConfig,
) -> Result<ScorResult> {
    if starts.is_empty() {
        return Err(Error::NoStarts);
    }
    if let Some(s) = starts.iter().find(|s| s.dim() != f.dim()) {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: s.dim() });
    }
    let results: Vec<Result<ScorResult>> = if config.parallel_eval && f.thread_safe() {
        starts.par_iter().map(|s| scor_minimize(f, s, config)).collect()
    } else {
        starts.iter().map(|s| scor_minimize(f, s, config)).collect()
    };
    let mut best: Option<ScorResult> = None;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.objective_value < b.objective_value) {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}
