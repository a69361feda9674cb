//! Rank-based objectives for ordinal multi-category outcomes.
//!
//! All objectives operate on linear combination scores `beta' x` and use a
//! strict ordering indicator: tied scores never count as correctly ordered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::Objective;
use crate::sphere::UnitVector;

/// `M >= 2` ordered outcome classes, each an `n_j x d` row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSample {
    d: usize,
    classes: Vec<Vec<f64>>,
}

impl MulticlassSample {
    /// Builds a sample from per-class rows.
    pub fn from_rows(classes: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let d = classes
            .iter()
            .flat_map(|c| c.first())
            .map(Vec::len)
            .next()
            .ok_or_else(|| Error::InvalidSample("no rows".into()))?;
        let flat = classes
            .into_iter()
            .map(|rows| {
                if rows.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidSample("rows differ in length".into()));
                }
                Ok(rows.into_iter().flatten().collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::from_flat(d, flat)
    }

    /// Builds a sample from per-class row-major buffers.
    pub fn from_flat(d: usize, classes: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSample("zero columns".into()));
        }
        if classes.len() < 2 {
            return Err(Error::InvalidSample(format!("need at least 2 classes, got {}", classes.len())));
        }
        for (j, c) in classes.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::EmptyClass(j));
            }
            if c.len() % d != 0 {
                return Err(Error::InvalidSample(format!("class {j} is not a multiple of {d} columns")));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSample(format!("class {j} has non-finite entries")));
            }
        }
        Ok(Self { d, classes })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_size(&self, j: usize) -> usize {
        self.classes[j].len() / self.d
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        (0..self.num_classes()).map(|j| self.class_size(j)).collect()
    }

    pub fn rows(&self, j: usize) -> impl Iterator<Item = &[f64]> {
        self.classes[j].chunks_exact(self.d)
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.d) {
            return Err(Error::DimensionMismatch { expected: self.d, found: c + 1 });
        }
        let classes = (0..self.num_classes())
            .map(|j| self.rows(j).flat_map(|r| cols.iter().map(move |&c| r[c])).collect())
            .collect();
        Self::from_flat(cols.len(), classes)
    }

    /// Replaces every row by `(max_k x_k, min_k x_k)`.
    pub fn min_max_reduce(&self) -> Result<Self> {
        if self.d < 2 {
            return Err(Error::TooFewDimensions(self.d));
        }
        let classes = (0..self.num_classes())
            .map(|j| {
                self.rows(j)
                    .flat_map(|r| {
                        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
                        [hi, lo]
                    })
                    .collect()
            })
            .collect();
        Self::from_flat(2, classes)
    }
}

/// Combination scores per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub classes: Vec<Vec<f64>>,
}

impl ScoreSet {
    pub fn new(classes: Vec<Vec<f64>>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::InvalidSample("need at least 2 classes".into()));
        }
        if let Some(j) = classes.iter().position(Vec::is_empty) {
            return Err(Error::EmptyClass(j));
        }
        Ok(Self { classes })
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Number of cross-class tuples, `prod n_j`.
    pub fn tuple_count(&self) -> u128 {
        self.classes.iter().map(|c| c.len() as u128).product()
    }
}

pub fn scores(beta: &UnitVector, sample: &MulticlassSample) -> Result<ScoreSet> {
    linear_scores(beta.as_slice(), sample)
}

/// Scores for an arbitrary (not necessarily unit) coefficient vector.
pub fn linear_scores(beta: &[f64], sample: &MulticlassSample) -> Result<ScoreSet> {
    if beta.len() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), found: beta.len() });
    }
    let classes = (0..sample.num_classes())
        .map(|j| sample.rows(j).map(|r| r.iter().zip(beta).map(|(x, b)| x * b).sum()).collect())
        .collect();
    Ok(ScoreSet { classes })
}

/// Number of tuples, one score per class, that are strictly increasing in
/// class order.
///
/// Class by class, each score carries the number of strictly increasing
/// chains ending at it; sorting the previous class lets every lookup be a
/// binary search over prefix sums.
pub fn ordered_tuple_count(set: &ScoreSet) -> u128 {
    let mut prev: Vec<(f64, u128)> = set.classes[0].iter().map(|&x| (x, 1)).collect();
    for class in &set.classes[1..] {
        prev.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(prev.len() + 1);
        prefix.push(0u128);
        for &(_, c) in &prev {
            prefix.push(prefix.last().unwrap() + c);
        }
        prev = class
            .iter()
            .map(|&x| {
                let below = prev.partition_point(|&(y, _)| y < x);
                (x, prefix[below])
            })
            .collect();
    }
    prev.iter().map(|&(_, c)| c).sum()
}

/// Product-loop reference for [`ordered_tuple_count`]; `O(prod n_j)`.
pub fn ordered_tuple_count_brute_force(set: &ScoreSet) -> u128 {
    fn walk(classes: &[Vec<f64>], floor: f64) -> u128 {
        match classes.split_first() {
            None => 1,
            Some((head, rest)) => head.iter().filter(|&&x| x > floor).map(|&x| walk(rest, x)).sum(),
        }
    }
    set.classes[0].iter().map(|&x| walk(&set.classes[1..], x)).sum()
}

/// Empirical hypervolume under the ROC manifold of a score set.
pub fn ehum_scores(set: &ScoreSet) -> f64 {
    ordered_tuple_count(set) as f64 / set.tuple_count() as f64
}

/// Empirical HUM of `beta' x`.
pub fn ehum(beta: &UnitVector, sample: &MulticlassSample) -> Result<f64> {
    Ok(ehum_scores(&scores(beta, sample)?))
}

/// Brute-force empirical HUM, used as an oracle.
pub fn ehum_brute_force(beta: &UnitVector, sample: &MulticlassSample) -> Result<f64> {
    let set = scores(beta, sample)?;
    Ok(ordered_tuple_count_brute_force(&set) as f64 / set.tuple_count() as f64)
}

/// Number of pairs with `hi > lo` strictly.
pub fn pairwise_count(lo: &[f64], hi: &[f64]) -> u128 {
    let mut sorted = lo.to_vec();
    sorted.sort_by(f64::total_cmp);
    hi.iter().map(|&x| sorted.partition_point(|&y| y < x) as u128).sum()
}

/// Empirical `P(hi > lo)` with ties counted as 0.
pub fn pairwise_auc(scores_lo: &[f64], scores_hi: &[f64]) -> Result<f64> {
    if scores_lo.is_empty() {
        return Err(Error::EmptyClass(0));
    }
    if scores_hi.is_empty() {
        return Err(Error::EmptyClass(1));
    }
    let total = scores_lo.len() as f64 * scores_hi.len() as f64;
    Ok(pairwise_count(scores_lo, scores_hi) as f64 / total)
}

/// AUCs of the `M - 1` adjacent class pairs.
pub fn adjacent_aucs(set: &ScoreSet) -> Vec<f64> {
    set.classes
        .windows(2)
        .map(|w| pairwise_count(&w[0], &w[1]) as f64 / (w[0].len() as f64 * w[1].len() as f64))
        .collect()
}

pub fn ulba_pa_scores(set: &ScoreSet) -> f64 {
    let aucs = adjacent_aucs(set);
    aucs.iter().sum::<f64>() / aucs.len() as f64
}

pub fn ulba_pm_scores(set: &ScoreSet) -> f64 {
    adjacent_aucs(set).into_iter().fold(f64::INFINITY, f64::min)
}

/// Mean of adjacent pairwise AUCs.
pub fn ulba_pa(beta: &UnitVector, sample: &MulticlassSample) -> Result<f64> {
    Ok(ulba_pa_scores(&scores(beta, sample)?))
}

/// Minimum of adjacent pairwise AUCs.
pub fn ulba_pm(beta: &UnitVector, sample: &MulticlassSample) -> Result<f64> {
    Ok(ulba_pm_scores(&scores(beta, sample)?))
}

/// Youden-optimal thresholds at each adjacent class boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPoints {
    pub thresholds: Vec<f64>,
    pub youden_values: Vec<f64>,
    /// False when some boundary threshold is not above the previous one.
    pub monotone: bool,
}

impl CutPoints {
    pub fn mean_youden(&self) -> f64 {
        self.youden_values.iter().sum::<f64>() / self.youden_values.len() as f64
    }
}

/// For boundary `j | j+1`, classes `0..=j` are pooled as negatives and the
/// rest as positives; a score above the threshold is called positive. The
/// candidate thresholds are midpoints of consecutive distinct pooled scores
/// and ties in Youden's index go to the smallest threshold.
pub fn youden_cutpoints(set: &ScoreSet) -> Result<CutPoints> {
    let m = set.num_classes();
    if m < 2 {
        return Err(Error::InvalidSample("need at least 2 classes".into()));
    }
    // (score, is_positive) for the whole sample, sorted once; membership
    // changes per boundary
    let mut all: Vec<(f64, usize)> = set
        .classes
        .iter()
        .enumerate()
        .flat_map(|(j, c)| c.iter().map(move |&x| (x, j)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut thresholds = Vec::with_capacity(m - 1);
    let mut youden_values = Vec::with_capacity(m - 1);
    for boundary in 0..m - 1 {
        let n_neg = all.iter().filter(|&&(_, j)| j <= boundary).count() as f64;
        let n_pos = all.len() as f64 - n_neg;
        let mut neg_below = 0.0;
        let mut pos_below = 0.0;
        let mut best: Option<(f64, f64)> = None;
        let mut k = 0;
        while k < all.len() {
            let v = all[k].0;
            while k < all.len() && all[k].0 == v {
                if all[k].1 <= boundary {
                    neg_below += 1.0;
                } else {
                    pos_below += 1.0;
                }
                k += 1;
            }
            if k == all.len() {
                break;
            }
            let threshold = 0.5 * (v + all[k].0);
            let sensitivity = (n_pos - pos_below) / n_pos;
            let specificity = neg_below / n_neg;
            let youden = sensitivity + specificity - 1.0;
            if best.is_none_or(|(_, y)| youden > y) {
                best = Some((threshold, youden));
            }
        }
        let (t, y) = best.ok_or(Error::DegenerateScores(boundary))?;
        thresholds.push(t);
        youden_values.push(y);
    }
    let monotone = thresholds.windows(2).all(|w| w[1] > w[0]);
    Ok(CutPoints { thresholds, youden_values, monotone })
}

/// Which surrogate of the HUM to optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Ehum,
    Ulba,
}

impl ObjectiveKind {
    pub fn label(self) -> &'static str {
        match self {
            ObjectiveKind::Ehum => "EHUM",
            ObjectiveKind::Ulba => "ULBA",
        }
    }

    pub fn on_scores(self, set: &ScoreSet) -> f64 {
        match self {
            ObjectiveKind::Ehum => ehum_scores(set),
            ObjectiveKind::Ulba => ulba_pa_scores(set),
        }
    }

    pub fn bind(self, sample: &MulticlassSample) -> SampleObjective<'_> {
        SampleObjective { kind: self, sample }
    }
}

/// EHUM or ULBA (`P_A`) of a fixed sample, as a function of `beta`.
///
/// Values are to be maximized.
#[derive(Debug, Clone, Copy)]
pub struct SampleObjective<'a> {
    pub kind: ObjectiveKind,
    pub sample: &'a MulticlassSample,
}

impl SampleObjective<'_> {
    /// Objective at an arbitrary coefficient vector (scale does not matter).
    pub fn evaluate_raw(&self, beta: &[f64]) -> f64 {
        match linear_scores(beta, self.sample) {
            Ok(set) => self.kind.on_scores(&set),
            Err(_) => f64::NAN,
        }
    }
}

impl Objective for SampleObjective<'_> {
    fn dim(&self) -> usize {
        self.sample.dim()
    }

    fn evaluate(&self, beta: &UnitVector) -> f64 {
        self.evaluate_raw(beta.as_slice())
    }
}

/// Expected HUM of a random ordering, `1 / M!`.
pub fn random_guess_hum(m: usize) -> f64 {
    1.0 / (1..=m).map(|k| k as f64).product::<f64>()
}
