//! Simulation scenarios and the train/test replication protocol.
//!
//! Class `i` runs from 0, so class 0 has zero mean in the normal scenarios.
//!
//! * `NormalIndependent`: rows ~ N(mu_i, I) with
//!   `mu_ij = (-1)^j * i * (1 + 0.1 (j - 1))`, `j = 1..d`.
//! * `NormalAR`: same means, covariance `a_st = 0.5^|s-t|`, sampled through
//!   its Cholesky factor.
//! * `Weibull`: marker `j` of class `i` is `gamma_j + lambda_i * (-ln U)^(1/k_j)`
//!   with `lambda_i = i + 1`, `k_j = 0.5 j`, `gamma_j = (-5)^j`.
//!
//! # Reproducibility
//!
//! Samples are drawn from ChaCha20 (`rand_chacha::ChaCha20Rng`, seeded with
//! `seed_from_u64`). Replication `r` draws its training sample from
//! `derive_seed(seed, r, Train)` and its test sample from
//! `derive_seed(seed, r, Test)`, a SplitMix64 mix of the three inputs.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Open01, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    min_max_estimate, nelder_mead_estimate, step_down_estimate, Method, NelderMeadOptions,
};
use crate::error::{Error, Result};
use crate::objectives::{ehum, MulticlassSample, ObjectiveKind};
use crate::optimizer::{scor_maximize, ScorConfig};
use crate::sphere::UnitVector;

/// Identifies the generator in report headers.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64)";
pub const SEED_DERIVATION: &str = "splitmix64(seed ^ splitmix64(2*r + role)), role: train=0, test=1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    NormalIndependent,
    NormalAR,
    Weibull,
}

impl Scenario {
    /// Scenario by its 1-based number.
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Scenario::NormalIndependent),
            2 => Ok(Scenario::NormalAR),
            3 => Ok(Scenario::Weibull),
            _ => Err(Error::InvalidSpec(format!("unknown scenario {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Scenario::NormalIndependent => 1,
            Scenario::NormalAR => 2,
            Scenario::Weibull => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub d: usize,
    pub n_per_class: Vec<usize>,
    pub seed: u64,
    /// Zeroes the class means of the normal scenarios (null model).
    #[serde(default)]
    pub null_means: bool,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, d: usize, n_per_class: Vec<usize>, seed: u64) -> Self {
        Self { scenario, d, n_per_class, seed, null_means: false }
    }

    pub fn num_classes(&self) -> usize {
        self.n_per_class.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("d must be positive".into()));
        }
        if self.n_per_class.len() < 2 {
            return Err(Error::InvalidSpec("need at least 2 classes".into()));
        }
        if self.n_per_class.contains(&0) {
            return Err(Error::InvalidSpec("every class needs at least one subject".into()));
        }
        if self.scenario == Scenario::Weibull && self.d > 400 {
            // (-5)^j overflows f64 past j ~ 441
            return Err(Error::InvalidSpec("Weibull scenario supports d <= 400".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Mean of marker `j` (1-based) in class `i` for the normal scenarios.
pub fn normal_mean(i: usize, j: usize) -> f64 {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * i as f64 * (1.0 + 0.1 * (j as f64 - 1.0))
}

/// `(scale, shape, location)` of marker `j` (1-based) in class `i`.
pub fn weibull_params(i: usize, j: usize) -> (f64, f64, f64) {
    (i as f64 + 1.0, 0.5 * j as f64, (-5.0f64).powi(j as i32))
}

/// `a_st = 0.5^|s-t|`.
pub fn ar_covariance(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |s, t| 0.5f64.powi((s as i32 - t as i32).abs()))
}

pub fn generate(spec: &ScenarioSpec) -> Result<MulticlassSample> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let d = spec.d;
    let chol = match spec.scenario {
        Scenario::NormalAR => Some(
            ar_covariance(d)
                .cholesky()
                .ok_or_else(|| Error::InvalidSpec("covariance is not positive definite".into()))?
                .l(),
        ),
        _ => None,
    };

    let mut classes = Vec::with_capacity(spec.num_classes());
    for (i, &n) in spec.n_per_class.iter().enumerate() {
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            match spec.scenario {
                Scenario::NormalIndependent | Scenario::NormalAR => {
                    let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                    for s in 0..d {
                        let noise = match &chol {
                            Some(l) => (0..=s).map(|t| l[(s, t)] * z[t]).sum(),
                            None => z[s],
                        };
                        let mean = if spec.null_means { 0.0 } else { normal_mean(i, s + 1) };
                        data.push(mean + noise);
                    }
                }
                Scenario::Weibull => {
                    for j in 1..=d {
                        let (scale, shape, location) = weibull_params(i, j);
                        let u: f64 = rng.sample(Open01);
                        data.push(location + scale * (-u.ln()).powf(1.0 / shape));
                    }
                }
            }
        }
        classes.push(data);
    }
    MulticlassSample::from_flat(d, classes)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Train,
    Test,
}

/// Seed for replication `r` in the given role.
pub fn derive_seed(seed: u64, replication: u64, role: Role) -> u64 {
    let lane = 2 * replication + matches!(role, Role::Test) as u64;
    splitmix64(seed ^ splitmix64(lane))
}

/// A fitted combining vector together with the feature map it acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCombination {
    pub method: Method,
    pub objective: ObjectiveKind,
    pub solution: UnitVector,
    pub train_value: f64,
}

impl FittedCombination {
    /// Features the solution is applied to: the raw markers, or the
    /// per-subject `(max, min)` pair for min-max.
    pub fn features(&self, sample: &MulticlassSample) -> Result<MulticlassSample> {
        match self.method {
            Method::MinMax => sample.min_max_reduce(),
            _ => Ok(sample.clone()),
        }
    }

    pub fn ehum_on(&self, sample: &MulticlassSample) -> Result<f64> {
        ehum(&self.solution, &self.features(sample)?)
    }
}

/// Fits one method to one objective; every method maximizes.
pub fn fit_combination(
    method: Method,
    objective: ObjectiveKind,
    sample: &MulticlassSample,
    scor: &ScorConfig,
) -> Result<FittedCombination> {
    let (solution, train_value) = match method {
        Method::Scor => {
            let start = UnitVector::uniform(sample.dim())?;
            let res = scor_maximize(&objective.bind(sample), &start, scor)?;
            (res.solution, res.objective_value)
        }
        Method::NelderMead => {
            let res = nelder_mead_estimate(&objective.bind(sample), Some(sample), &NelderMeadOptions::default())?;
            (res.solution, res.objective_value)
        }
        Method::StepDown => {
            let res = step_down_estimate(objective, sample)?;
            (res.solution, res.objective_value)
        }
        Method::MinMax => {
            let res = min_max_estimate(objective, sample)?;
            (res.solution, res.objective_value)
        }
    };
    Ok(FittedCombination { method, objective, solution, train_value })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub method: Method,
    pub objective: ObjectiveKind,
    pub replications: usize,
    pub mean_test_ehum: f64,
    /// Standard deviation across replications.
    pub sd_test_ehum: f64,
    /// `sd / sqrt(replications)`.
    pub se_test_ehum: f64,
    pub per_replication: Vec<f64>,
}

impl ReplicationReport {
    pub fn from_values(method: Method, objective: ObjectiveKind, values: Vec<f64>) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            method,
            objective,
            replications: n,
            mean_test_ehum: mean,
            sd_test_ehum: sd,
            se_test_ehum: sd / (n as f64).sqrt(),
            per_replication: values,
        }
    }
}

/// Fits every `(method, objective)` pair on fresh training samples and
/// scores it by EHUM on independent test samples of the same design.
///
/// Reports come back in `methods x objectives` order. Replications run in
/// parallel but each draws from its own derived seeds, so the output does
/// not depend on the worker count.
pub fn replicate_experiment(
    spec: &ScenarioSpec,
    methods: &[Method],
    objectives: &[ObjectiveKind],
    replications: usize,
    seed: u64,
    scor: &ScorConfig,
) -> Result<Vec<ReplicationReport>> {
    spec.validate()?;
    if replications == 0 {
        return Err(Error::InvalidSpec("replications must be at least 1".into()));
    }
    let pairs: Vec<(Method, ObjectiveKind)> =
        methods.iter().flat_map(|&m| objectives.iter().map(move |&o| (m, o))).collect();
    if pairs.is_empty() {
        return Err(Error::InvalidSpec("no method/objective pairs requested".into()));
    }

    let per_rep: Vec<Vec<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let train = generate(&spec.with_seed(derive_seed(seed, r, Role::Train)))?;
            let test = generate(&spec.with_seed(derive_seed(seed, r, Role::Test)))?;
            pairs
                .iter()
                .map(|&(m, o)| fit_combination(m, o, &train, scor)?.ehum_on(&test))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, &(m, o))| ReplicationReport::from_values(m, o, per_rep.iter().map(|v| v[k]).collect()))
        .collect())
}
