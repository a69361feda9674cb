//! Geometry of exploratory moves on the unit sphere.
//!
//! A move perturbs one coordinate `i` by a signed step `s` and shifts every
//! other retained coordinate by a common adjustment `t` chosen so that the
//! resulting point stays on the sphere. Coordinates whose magnitude falls
//! below the sparsity threshold `lambda` are zeroed in the candidate before
//! `t` is computed.
//!
//! With `G` the adjusted set, `Z` the zeroed set, `S = sum_{k in G} beta_k`
//! and `Q = sum_{k in Z} beta_k^2`, the adjustment solves
//!
//! ```text
//! |G| t^2 + 2 S t + (2 s beta_i + s^2 - Q) = 0
//! ```
//!
//! and the root that vanishes as `s -> 0` is always taken.
//!
//! Coordinate indices are zero-based throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum beta_k^2 - 1|` accepted by [`UnitVector::new`].
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// A point on the unit sphere in `d >= 2` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Validates that `coords` already lies on the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_shape(&coords)?;
        let residual = (norm_sq(&coords) - 1.0).abs();
        if residual > FEASIBILITY_TOL {
            return Err(Error::NotUnitNorm { residual });
        }
        Ok(Self(coords))
    }

    /// Projects a nonzero finite vector onto the sphere.
    pub fn normalize(v: &[f64]) -> Result<Self> {
        check_shape(v)?;
        // scale first so that huge or tiny entries do not overflow the sum of squares
        let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Err(Error::ZeroVector);
        }
        let norm = scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt();
        Ok(Self(v.iter().map(|x| x / norm).collect()))
    }

    /// `(1/sqrt(d), ..., 1/sqrt(d))`.
    pub fn uniform(d: usize) -> Result<Self> {
        Self::normalize(&vec![1.0; d])
    }

    /// A uniformly distributed point (normalized Gaussian draw).
    pub fn random<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            match Self::normalize(&v) {
                Err(Error::ZeroVector) => continue,
                other => return other,
            }
        }
    }

    /// `sign * e_i`.
    pub fn axis(d: usize, i: usize, sign: f64) -> Result<Self> {
        if i >= d {
            return Err(Error::DimensionMismatch { expected: d, found: i + 1 });
        }
        let mut v = vec![0.0; d];
        v[i] = if sign < 0.0 { -1.0 } else { 1.0 };
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn distance(&self, other: &UnitVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `|sum beta_k^2 - 1|`.
    pub fn residual(&self) -> f64 {
        (norm_sq(&self.0) - 1.0).abs()
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for UnitVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Shorthand for [`UnitVector::normalize`].
pub fn normalize(v: &[f64]) -> Result<UnitVector> {
    UnitVector::normalize(v)
}

fn check_shape(v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::TooFewDimensions(v.len()));
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Why no candidate could be built for a coordinate move.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AdjustError {
    #[error("no real adjustment step (discriminant {discriminant})")]
    NoRealSolution { discriminant: f64 },
    #[error("every other coordinate is zeroed; nothing can absorb the move")]
    EmptyAdjustSet,
}

/// Split of the non-moving coordinates into zeroed and adjusted sets.
///
/// Depends only on the incumbent, the moving coordinate and `lambda`, so it
/// is computed once per coordinate and reused across local step decays.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub coordinate: usize,
    pub zeroed: Vec<usize>,
    pub adjusted: Vec<usize>,
    adjusted_sum: f64,
    zeroed_sumsq: f64,
    pivot: f64,
}

impl Partition {
    pub fn new(beta: &UnitVector, i: usize, lambda: f64) -> Self {
        assert!(i < beta.dim(), "coordinate {i} out of range for d = {}", beta.dim());
        let (mut zeroed, mut adjusted) = (Vec::new(), Vec::new());
        let (mut adjusted_sum, mut zeroed_sumsq) = (0.0, 0.0);
        for (k, &b) in beta.as_slice().iter().enumerate() {
            if k == i {
                continue;
            }
            if b.abs() < lambda {
                zeroed.push(k);
                zeroed_sumsq += b * b;
            } else {
                adjusted.push(k);
                adjusted_sum += b;
            }
        }
        Self { coordinate: i, zeroed, adjusted, adjusted_sum, zeroed_sumsq, pivot: beta[i] }
    }

    /// Sum of the incumbent's coordinates over the adjusted set.
    pub fn adjusted_sum(&self) -> f64 {
        self.adjusted_sum
    }

    /// Sum of squares of the incumbent's coordinates over the zeroed set.
    pub fn zeroed_sumsq(&self) -> f64 {
        self.zeroed_sumsq
    }

    fn constant_term(&self, s: f64) -> f64 {
        2.0 * s * self.pivot + s * s - self.zeroed_sumsq
    }

    /// `(2 S)^2 - 4 |G| (2 s beta_i + s^2 - Q)`.
    pub fn discriminant(&self, s: f64) -> f64 {
        let b = 2.0 * self.adjusted_sum;
        b * b - 4.0 * self.adjusted.len() as f64 * self.constant_term(s)
    }

    /// The root of the adjustment quadratic that tends to zero with `s`.
    ///
    /// That is `(-2S + sqrt(D)) / 2|G|` when `S > 0` and `(-2S - sqrt(D)) / 2|G|`
    /// when `S < 0`; with `S = 0` the positive root is used.
    pub fn adjustment(&self, s: f64) -> std::result::Result<f64, AdjustError> {
        if self.adjusted.is_empty() {
            return Err(AdjustError::EmptyAdjustSet);
        }
        let discriminant = self.discriminant(s);
        if discriminant < 0.0 {
            return Err(AdjustError::NoRealSolution { discriminant });
        }
        let a = self.adjusted.len() as f64;
        let b = 2.0 * self.adjusted_sum;
        let root = discriminant.sqrt();
        // -2c / (b + sign(b) sqrt(D)) is the vanishing root without cancellation
        let t = if b > 0.0 {
            -2.0 * self.constant_term(s) / (b + root)
        } else if b < 0.0 {
            -2.0 * self.constant_term(s) / (b - root)
        } else {
            root / (2.0 * a)
        };
        Ok(t)
    }

    /// The raw (un-renormalized) point implied by step `s` and adjustment `t`.
    pub fn apply(&self, beta: &UnitVector, s: f64, t: f64) -> Vec<f64> {
        let mut out = beta.as_slice().to_vec();
        out[self.coordinate] += s;
        for &k in &self.adjusted {
            out[k] += t;
        }
        for &k in &self.zeroed {
            out[k] = 0.0;
        }
        out
    }
}

/// Outcome of a successful adjustment computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjustment {
    pub t: f64,
    pub zeroed: Vec<usize>,
    pub adjusted: Vec<usize>,
}

/// Computes the adjustment step for moving coordinate `i` by `s`.
pub fn adjustment_step(
    beta: &UnitVector,
    i: usize,
    s: f64,
    lambda: f64,
) -> std::result::Result<Adjustment, AdjustError> {
    let part = Partition::new(beta, i, lambda);
    let t = part.adjustment(s)?;
    Ok(Adjustment { t, zeroed: part.zeroed, adjusted: part.adjusted })
}

/// A feasible exploratory move and the candidate point it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateMove {
    pub coordinate: usize,
    /// Step actually applied, after any local decay.
    pub signed_step: f64,
    pub adjustment: f64,
    pub zeroed: Vec<usize>,
    pub adjusted: Vec<usize>,
    /// Candidate point, renormalized.
    pub point: UnitVector,
    /// `|norm^2 - 1|` of the analytic point before renormalization.
    pub residual: f64,
}

/// Result of shrinking one local step until a real adjustment exists.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalStep {
    pub step: f64,
    pub decays: u32,
    pub adjustment: std::result::Result<f64, AdjustError>,
}

/// Divides `s` by `rho` while no real adjustment exists and `|s| > phi`.
pub fn local_step(part: &Partition, s: f64, rho: f64, phi: f64) -> LocalStep {
    let mut step = s;
    let mut decays = 0;
    let mut adjustment = part.adjustment(step);
    while matches!(adjustment, Err(AdjustError::NoRealSolution { .. })) && step.abs() > phi {
        step /= rho;
        decays += 1;
        adjustment = part.adjustment(step);
    }
    LocalStep { step, decays, adjustment }
}

/// Builds the up to `2d` candidate moves around `beta`.
///
/// Order is `(0,+), (0,-), (1,+), (1,-), ...`; moves with no real adjustment
/// after local decay, or with an empty adjusted set, are omitted.
pub fn generate_candidates(
    beta: &UnitVector,
    step: f64,
    lambda: f64,
    rho: f64,
    phi: f64,
) -> Vec<CandidateMove> {
    assert!(phi > 0.0 && step > phi, "need step > phi > 0");
    assert!(rho > 1.0, "decay rate must exceed 1");
    let d = beta.dim();
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        let part = Partition::new(beta, i, lambda);
        for sign in [1.0, -1.0] {
            let local = local_step(&part, sign * step, rho, phi);
            let Ok(t) = local.adjustment else { continue };
            let raw = part.apply(beta, local.step, t);
            let residual = (norm_sq(&raw) - 1.0).abs();
            // the analytic point can only be zero if the sphere constraint broke down
            let Ok(point) = UnitVector::normalize(&raw) else { continue };
            out.push(CandidateMove {
                coordinate: i,
                signed_step: local.step,
                adjustment: t,
                zeroed: part.zeroed.clone(),
                adjusted: part.adjusted.clone(),
                point,
                residual,
            });
        }
    }
    out
}
