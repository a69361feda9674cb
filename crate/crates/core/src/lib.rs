//! Derivative-free global optimization over the unit sphere, together with the
//! rank-based objectives used to combine biomarkers for ordinal multi-category
//! outcomes.
//!
//! The crate is organised bottom-up:
//!
//! * [`sphere`] – exact geometry of coordinate moves that stay on the sphere.
//! * [`optimizer`] – the run/iteration pattern search built on those moves.
//! * [`objectives`] – empirical hypervolume under the ROC manifold (EHUM),
//!   pairwise AUC bounds (ULBA) and Youden cut-points.
//! * [`baselines`] – competing estimators (Nelder-Mead, step-down, min-max).
//! * [`simgen`] – seeded simulation scenarios and the train/test replication
//!   protocol.
//!
//! ```
//! use scor::{optimizer::{scor_minimize, FnObjective, ScorConfig}, sphere::UnitVector};
//!
//! let f = FnObjective::new(3, |b: &[f64]| b[0]);
//! let start = UnitVector::uniform(3).unwrap();
//! let res = scor_minimize(&f, &start, &ScorConfig::default()).unwrap();
//! assert!((res.objective_value + 1.0).abs() < 1e-3);
//! ```

pub mod baselines;
pub mod error;
pub mod objectives;
pub mod optimizer;
pub mod simgen;
pub mod sphere;

pub use error::{Error, Result};
pub use objectives::{MulticlassSample, ObjectiveKind};
pub use optimizer::{Objective, ScorConfig, ScorResult};
pub use sphere::UnitVector;
