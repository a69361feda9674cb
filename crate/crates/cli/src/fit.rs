use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use scor::baselines::{min_max_estimate, nelder_mead_estimate, step_down_estimate, Method, NelderMeadOptions};
use scor::objectives::{random_guess_hum, scores, ulba_pa_scores, ulba_pm_scores, ehum_scores, youden_cutpoints};
use scor::optimizer::{multistart, Negated};
use scor::{MulticlassSample, ObjectiveKind, ScorConfig, UnitVector};

use crate::cli::{parse_methods, FitArgs};
use crate::dataset::{parse_label_map, Dataset};
use crate::error::{CliError, Result};
use crate::report::{self, Coefficient, FitSummary, Header, MethodFit, Metrics, Record, Timing};

/// Everything `fit` produces; `records` is what gets written.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub fits: Vec<MethodFit>,
    pub summary: FitSummary,
    pub records: Vec<Record>,
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitOutcome> {
    let cfg = args.scor.config()?;
    let methods = parse_methods(&args.method)?;
    if args.starts == 0 {
        return Err(CliError::Config("--starts must be at least 1".into()));
    }
    let label_map = args.merge_labels.as_deref().map(parse_label_map).transpose()?;

    let mut train = Dataset::read(&args.data)?;
    let mut test = args.test.as_deref().map(Dataset::read).transpose()?;
    if let Some(map) = &label_map {
        train.merge_labels(map)?;
        if let Some(t) = test.as_mut() {
            t.merge_labels(map)?;
        }
    }
    if train.dim() < 2 {
        return Err(CliError::Config("need at least 2 marker columns".into()));
    }
    if let Some(t) = &test {
        if t.names != train.names || t.num_classes() != train.num_classes() {
            return Err(CliError::Config("test file must have the same columns and classes as the data file".into()));
        }
    }
    let sample = train.sample()?;
    let test_sample = test.as_ref().map(Dataset::sample).transpose()?;
    let kind: ObjectiveKind = args.objective.into();

    let mut fits = Vec::new();
    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for &method in &methods {
        let clock = Instant::now();
        match fit_method(method, kind, &sample, &cfg, args.starts, args.seed) {
            Ok((solution, value)) => {
                let names = match method {
                    Method::MinMax => vec!["max".to_string(), "min".to_string()],
                    _ => train.names.clone(),
                };
                let features = |s: &MulticlassSample| match method {
                    Method::MinMax => s.min_max_reduce(),
                    _ => Ok(s.clone()),
                };
                let train_metrics = metrics(&solution, &features(&sample)?)?;
                let test_metrics = test_sample.as_ref().map(|t| metrics(&solution, &features(t)?)).transpose()?;
                fits.push(MethodFit {
                    method: method.label().into(),
                    objective: kind.label().into(),
                    coefficients: names
                        .into_iter()
                        .zip(solution.as_slice())
                        .map(|(name, &value)| Coefficient { name, value })
                        .collect(),
                    objective_value: value,
                    train: train_metrics,
                    test: test_metrics,
                    best: false,
                });
            }
            Err(e) => failures.push(format!("{}: {e}", method.label())),
        }
        timings.push(Timing { label: method.label().into(), wall_ms: clock.elapsed().as_secs_f64() * 1e3 });
    }
    if fits.is_empty() {
        return Err(CliError::Numeric(format!("every method failed: {}", failures.join("; "))));
    }

    let chosen_on = if test.is_some() { "test" } else { "train" };
    let quality = |f: &MethodFit| f.test.as_ref().unwrap_or(&f.train).ehum;
    let best = (1..fits.len()).fold(0, |b, k| if quality(&fits[k]) > quality(&fits[b]) { k } else { b });
    fits[best].best = true;

    let mut warnings = train.warnings.clone();
    for f in &fits {
        if f.train.cutpoints.is_none() {
            warnings.push(format!("{}: all training scores are equal, no cut-points", f.method));
        }
    }
    let summary = FitSummary {
        best_method: fits[best].method.clone(),
        chosen_on: chosen_on.into(),
        random_guess_hum: random_guess_hum(sample.num_classes()),
        classes: sample.num_classes(),
        markers: sample.dim(),
        class_sizes: sample.class_sizes(),
        warnings,
        failures,
    };

    let config = serde_json::json!({
        "data": args.data,
        "test": args.test,
        "objective": kind,
        "methods": methods.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "seed": args.seed,
        "starts": args.starts,
        "merge_labels": args.merge_labels,
        "scor": cfg,
    });
    let mut records = vec![Record::Header(Header::new("fit", config))];
    records.extend(fits.iter().cloned().map(Record::Fit));
    records.push(Record::FitSummary(summary.clone()));
    if args.timings {
        records.extend(timings.into_iter().map(Record::Timing));
    }
    if let Some(out) = &args.out {
        report::write(out, &records)?;
    }
    Ok(FitOutcome { fits, summary, records })
}

/// Fits one method; returns the unit-norm solution on the method's own
/// features and the objective value it reached.
pub fn fit_method(
    method: Method,
    kind: ObjectiveKind,
    sample: &MulticlassSample,
    cfg: &ScorConfig,
    starts: usize,
    seed: u64,
) -> Result<(UnitVector, f64)> {
    Ok(match method {
        Method::Scor => {
            let d = sample.dim();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut points = vec![UnitVector::uniform(d)?];
            for _ in 1..starts {
                points.push(UnitVector::random(d, &mut rng)?);
            }
            let res = multistart(&Negated(kind.bind(sample)), &points, cfg)?;
            (res.solution, -res.objective_value)
        }
        Method::NelderMead => {
            let res = nelder_mead_estimate(&kind.bind(sample), Some(sample), &NelderMeadOptions::default())?;
            (res.solution, res.objective_value)
        }
        Method::StepDown => {
            let res = step_down_estimate(kind, sample)?;
            (res.solution, res.objective_value)
        }
        Method::MinMax => {
            let res = min_max_estimate(kind, sample)?;
            (res.solution, res.objective_value)
        }
    })
}

pub fn metrics(beta: &UnitVector, sample: &MulticlassSample) -> Result<Metrics> {
    let set = scores(beta, sample)?;
    let cutpoints = match youden_cutpoints(&set) {
        Ok(c) => Some(c),
        Err(scor::Error::DegenerateScores(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Metrics {
        ehum: ehum_scores(&set),
        ulba_pa: ulba_pa_scores(&set),
        ulba_pm: ulba_pm_scores(&set),
        mean_youden: cutpoints.as_ref().map(|c| c.mean_youden()),
        cutpoints,
    })
}

pub fn render(outcome: &FitOutcome) -> String {
    let mut out = String::new();
    let has_test = outcome.fits.iter().any(|f| f.test.is_some());
    out.push_str(&format!(
        "{:<10} {:>8} {:>8} {:>8} {:>8}{}\n",
        "method",
        "EHUM",
        "P_A",
        "P_M",
        "Youden",
        if has_test { "  test EHUM" } else { "" }
    ));
    for f in &outcome.fits {
        let youden = f.train.mean_youden.map_or("-".to_string(), |y| format!("{y:.3}"));
        let test = f.test.as_ref().map_or(String::new(), |t| format!("  {:>9.3}", t.ehum));
        out.push_str(&format!(
            "{:<10} {:>8.3} {:>8.3} {:>8.3} {:>8}{}{}\n",
            f.method,
            f.train.ehum,
            f.train.ulba_pa,
            f.train.ulba_pm,
            youden,
            test,
            if f.best { "  *" } else { "" }
        ));
        let coefs: Vec<String> = f.coefficients.iter().map(|c| format!("{}={:.4}", c.name, c.value)).collect();
        out.push_str(&format!("           {}\n", coefs.join(" ")));
    }
    let s = &outcome.summary;
    out.push_str(&format!(
        "best on {}: {}   random guess 1/{}! = {:.3}\n",
        s.chosen_on, s.best_method, s.classes, s.random_guess_hum
    ));
    for w in &s.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    for f in &s.failures {
        out.push_str(&format!("failed: {f}\n"));
    }
    out
}
