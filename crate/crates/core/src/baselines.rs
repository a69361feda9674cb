//! Competing estimators of the combining vector.
//!
//! * Nelder-Mead over an unconstrained parameterization with the first
//!   coefficient pinned to `+-1`.
//! * Step-down: markers enter one at a time in order of individual EHUM and
//!   each new coefficient is chosen by a one-dimensional search.
//! * Min-max: every subject is reduced to its largest and smallest marker
//!   value and a direction on the unit circle is searched.
//!
//! All estimators maximize; every returned solution lies on the unit sphere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{ehum, MulticlassSample, ObjectiveKind};
use crate::optimizer::Objective;
use crate::sphere::UnitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Scor,
    NelderMead,
    StepDown,
    MinMax,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Scor => "SCOR",
            Method::NelderMead => "NM",
            Method::StepDown => "Step-down",
            Method::MinMax => "Min-max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaselineDetail {
    NelderMead {
        first_sign: f64,
        evaluations: usize,
    },
    StepDown {
        /// Markers in the order they entered.
        ordering: Vec<usize>,
        individual_ehum: Vec<f64>,
        /// Coefficients before normalization, in original marker order.
        raw_coefficients: Vec<f64>,
    },
    MinMax {
        theta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub method: Method,
    pub solution: UnitVector,
    pub objective_value: f64,
    pub detail: BaselineDetail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub tol_x: f64,
    pub tol_f: f64,
    /// Evaluation cap is this times the problem dimension.
    pub evals_per_dim: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            tol_x: 1e-8,
            tol_f: 1e-8,
            evals_per_dim: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Unconstrained Nelder-Mead minimization.
///
/// The initial simplex perturbs each coordinate of `x0` by 5%, or by
/// 0.00025 when it is zero. Iteration stops when both the value spread and
/// the max-norm simplex diameter are within tolerance, or after `max_evals`.
pub fn nelder_mead_minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    options: &NelderMeadOptions,
    max_evals: usize,
) -> SimplexMinimum {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let value = eval(x0, &mut evals);
        return SimplexMinimum { x: Vec::new(), value, evaluations: evals };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for k in 0..n {
        let mut y = x0.to_vec();
        y[k] = if y[k] != 0.0 { 1.05 * y[k] } else { 0.00025 };
        let v = eval(&y, &mut evals);
        simplex.push((y, v));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

    let combine = |a: &[f64], wa: f64, b: &[f64], wb: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
    };

    while evals < max_evals {
        let best = &simplex[0];
        let spread = simplex.iter().map(|p| (p.1 - best.1).abs()).fold(0.0, f64::max);
        let diameter = simplex
            .iter()
            .flat_map(|p| p.0.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= options.tol_f && diameter <= options.tol_x {
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&p.0) {
                *c += x / n as f64;
            }
        }
        let (worst_x, worst_v) = simplex[n].clone();
        let second_worst = simplex[n - 1].1;
        let best_v = simplex[0].1;

        let rho = options.reflection;
        let xr = combine(&centroid, 1.0 + rho, &worst_x, -rho);
        let fr = eval(&xr, &mut evals);

        let mut shrink = false;
        if fr < best_v {
            let chi = options.expansion;
            let xe = combine(&centroid, 1.0 + rho * chi, &worst_x, -rho * chi);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            simplex[n] = (xr, fr);
        } else if fr < worst_v {
            let psi = options.contraction;
            let xc = combine(&centroid, 1.0 + psi * rho, &worst_x, -psi * rho);
            let fc = eval(&xc, &mut evals);
            if fc <= fr {
                simplex[n] = (xc, fc);
            } else {
                shrink = true;
            }
        } else {
            let psi = options.contraction;
            let xcc = combine(&centroid, 1.0 - psi, &worst_x, psi);
            let fcc = eval(&xcc, &mut evals);
            if fcc < worst_v {
                simplex[n] = (xcc, fcc);
            } else {
                shrink = true;
            }
        }
        if shrink {
            let anchor = simplex[0].0.clone();
            for p in simplex.iter_mut().skip(1) {
                let x = combine(&anchor, 1.0 - options.shrink, &p.0, options.shrink);
                let v = eval(&x, &mut evals);
                *p = (x, v);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    }
    let (x, value) = simplex.swap_remove(0);
    SimplexMinimum { x, value, evaluations: evals }
}

fn assemble(first: f64, free: &[f64]) -> Vec<f64> {
    std::iter::once(first).chain(free.iter().copied()).collect()
}

/// Nelder-Mead with the first coefficient fixed to `+1` or `-1`.
///
/// The sign is the one maximizing the individual EHUM of marker 0 when
/// `sign_sample` is given, otherwise the one maximizing `objective` at
/// `+-e_0`. The free coordinates start at zero.
pub fn nelder_mead_estimate<O: Objective + ?Sized>(
    objective: &O,
    sign_sample: Option<&MulticlassSample>,
    options: &NelderMeadOptions,
) -> Result<BaselineResult> {
    let d = objective.dim();
    if d < 2 {
        return Err(Error::TooFewDimensions(d));
    }
    let plus = UnitVector::axis(d, 0, 1.0)?;
    let minus = UnitVector::axis(d, 0, -1.0)?;
    let first_sign = match sign_sample {
        Some(sample) => {
            if ehum(&minus, sample)? > ehum(&plus, sample)? {
                -1.0
            } else {
                1.0
            }
        }
        None => {
            if objective.evaluate(&minus) > objective.evaluate(&plus) {
                -1.0
            } else {
                1.0
            }
        }
    };

    let negated = |free: &[f64]| match UnitVector::normalize(&assemble(first_sign, free)) {
        Ok(beta) => -objective.evaluate(&beta),
        Err(_) => f64::INFINITY,
    };
    let min = nelder_mead_minimize(negated, &vec![0.0; d - 1], options, options.evals_per_dim * d);
    let solution = UnitVector::normalize(&assemble(first_sign, &min.x))?;
    let objective_value = objective.evaluate(&solution);
    Ok(BaselineResult {
        method: Method::NelderMead,
        solution,
        objective_value,
        detail: BaselineDetail::NelderMead { first_sign, evaluations: min.evaluations },
    })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `width`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, width: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    while b - a > width {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = f(e);
        }
    }
    if fc >= fe {
        (c, fc)
    } else {
        (e, fe)
    }
}

const STEP_DOWN_RANGE: f64 = 5.0;
const STEP_DOWN_GRID: usize = 201;
const STEP_DOWN_WIDTH: f64 = 1e-6;

/// Grid search over `[-5, 5]` then golden-section refinement.
///
/// Among equally good grid points the one closest to zero wins (the
/// coefficient the marker would have if left out); refinement is kept only
/// if strictly better.
fn one_dimensional_max<F: FnMut(f64) -> f64>(mut f: F) -> (f64, f64) {
    let spacing = 2.0 * STEP_DOWN_RANGE / (STEP_DOWN_GRID - 1) as f64;
    let mut best: (f64, f64) = (0.0, f64::NEG_INFINITY);
    for g in 0..STEP_DOWN_GRID {
        let c = -STEP_DOWN_RANGE + g as f64 * spacing;
        let v = f(c);
        if v > best.1 || (v == best.1 && c.abs() < best.0.abs()) {
            best = (c, v);
        }
    }
    let refined = golden_section_max(&mut f, best.0 - spacing, best.0 + spacing, STEP_DOWN_WIDTH);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

/// Per-marker EHUM using the better orientation, with that orientation.
pub fn individual_ehum(sample: &MulticlassSample) -> Result<Vec<(f64, f64)>> {
    let d = sample.dim();
    (0..d)
        .map(|k| {
            let plus = ehum(&UnitVector::axis(d, k, 1.0)?, sample)?;
            let minus = ehum(&UnitVector::axis(d, k, -1.0)?, sample)?;
            Ok(if minus > plus { (minus, -1.0) } else { (plus, 1.0) })
        })
        .collect()
}

/// Greedy one-coefficient-at-a-time estimator.
///
/// Markers are ranked by individual EHUM; the best enters with coefficient
/// `+-1` and each subsequent marker's coefficient is chosen with all earlier
/// ones held fixed.
pub fn step_down_estimate(kind: ObjectiveKind, sample: &MulticlassSample) -> Result<BaselineResult> {
    let d = sample.dim();
    if d < 2 {
        return Err(Error::TooFewDimensions(d));
    }
    let individual = individual_ehum(sample)?;
    let mut ordering: Vec<usize> = (0..d).collect();
    ordering.sort_by(|&a, &b| individual[b].0.total_cmp(&individual[a].0));

    let objective = kind.bind(sample);
    let mut coef = vec![0.0; d];
    coef[ordering[0]] = individual[ordering[0]].1;
    for &k in &ordering[1..] {
        let (c, _) = one_dimensional_max(|c| {
            let mut trial = coef.clone();
            trial[k] = c;
            objective.evaluate_raw(&trial)
        });
        coef[k] = c;
    }
    let solution = UnitVector::normalize(&coef)?;
    let objective_value = objective.evaluate(&solution);
    Ok(BaselineResult {
        method: Method::StepDown,
        solution,
        objective_value,
        detail: BaselineDetail::StepDown {
            ordering,
            individual_ehum: individual.iter().map(|p| p.0).collect(),
            raw_coefficients: coef,
        },
    })
}

const MIN_MAX_ANGLES: usize = 720;
const MIN_MAX_WIDTH: f64 = 1e-8;

/// Combines each subject's maximum and minimum marker value.
///
/// The solution is the 2-vector `(cos theta, sin theta)` acting on the
/// reduced features `(max, min)`; the objective is evaluated on the reduced
/// sample.
pub fn min_max_estimate(kind: ObjectiveKind, sample: &MulticlassSample) -> Result<BaselineResult> {
    let reduced = sample.min_max_reduce()?;
    let objective = kind.bind(&reduced);
    let at = |theta: f64| objective.evaluate_raw(&[theta.cos(), theta.sin()]);

    let spacing = std::f64::consts::TAU / MIN_MAX_ANGLES as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for g in 0..MIN_MAX_ANGLES {
        let theta = g as f64 * spacing;
        let v = at(theta);
        if v > best.1 {
            best = (theta, v);
        }
    }
    let refined = golden_section_max(at, best.0 - spacing, best.0 + spacing, MIN_MAX_WIDTH);
    let (theta, _) = if refined.1 > best.1 { refined } else { best };
    let solution = UnitVector::normalize(&[theta.cos(), theta.sin()])?;
    let objective_value = objective.evaluate(&solution);
    Ok(BaselineResult {
        method: Method::MinMax,
        solution,
        objective_value,
        detail: BaselineDetail::MinMax { theta },
    })
}
