use std::time::Instant;

use scor::simgen::{replicate_experiment, Scenario, ScenarioSpec};
use scor::ObjectiveKind;

use crate::cli::{dedup_in_order, parse_methods, SimulateArgs};
use crate::error::{CliError, Result};
use crate::report::{self, Cell, Header, Record, Timing};

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Vec<Record>> {
    let cfg = args.scor.config()?;
    let methods = parse_methods(&args.method)?;
    let mut objectives: Vec<ObjectiveKind> = args.objective.iter().map(|&o| o.into()).collect();
    dedup_in_order(&mut objectives);
    if objectives.is_empty() {
        return Err(CliError::Config("empty objective list".into()));
    }
    let scenario = Scenario::from_number(args.scenario)?;
    let n_per_class = match args.n.len() {
        1 => vec![args.n[0]; args.classes],
        k if k == args.classes => args.n.clone(),
        k => return Err(CliError::Config(format!("--n has {k} sizes for {} classes", args.classes))),
    };

    let config = serde_json::json!({
        "scenario": args.scenario,
        "classes": args.classes,
        "d": args.d,
        "n_per_class": n_per_class,
        "reps": args.reps,
        "seed": args.seed,
        "methods": methods.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "objectives": objectives,
        "scor": cfg,
    });
    let mut records = vec![Record::Header(Header::new("simulate", config))];
    let mut timings = Vec::new();
    for &d in &args.d {
        let spec = ScenarioSpec::new(scenario, d, n_per_class.clone(), args.seed);
        let clock = Instant::now();
        let reports = replicate_experiment(&spec, &methods, &objectives, args.reps, args.seed, &cfg)?;
        timings.push(Timing { label: format!("d={d}"), wall_ms: clock.elapsed().as_secs_f64() * 1e3 });
        records.extend(reports.into_iter().map(|r| {
            Record::Cell(Cell {
                scenario: args.scenario,
                classes: args.classes,
                d,
                n_per_class: n_per_class.clone(),
                method: r.method.label().into(),
                objective: r.objective.label().into(),
                replications: r.replications,
                mean_test_ehum: r.mean_test_ehum,
                sd_test_ehum: r.sd_test_ehum,
                se_test_ehum: r.se_test_ehum,
                per_replication: r.per_replication,
            })
        }));
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
        "{:<9} {:>3} {:>4} {:<12} {:<10} {:<5} {:>7} {:>7} {:>7}\n",
        "scenario", "M", "d", "n", "method", "obj", "mean", "sd", "se"
    );
    for r in records {
        if let Record::Cell(c) = r {
            let n: Vec<String> = c.n_per_class.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!(
                "{:<9} {:>3} {:>4} {:<12} {:<10} {:<5} {:>7.3} {:>7.3} {:>7.3}\n",
                c.scenario,
                c.classes,
                c.d,
                n.join(","),
                c.method,
                c.objective,
                c.mean_test_ehum,
                c.sd_test_ehum,
                c.se_test_ehum
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{Cli, Command};
    use clap::Parser;

    fn args(extra: &[&str]) -> SimulateArgs {
        let mut argv = vec!["scor", "simulate"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Simulate(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn one_cell_per_dimension_method_objective() {
        let a = args(&[
            "--scenario", "1", "--d", "3,4", "--n", "6", "--reps", "2", "--method", "scor,stepdown",
            "--objective", "ehum,ulba",
        ]);
        let records = cmd_simulate(&a).unwrap();
        let cells: Vec<&Cell> = records
            .iter()
            .filter_map(|r| if let Record::Cell(c) = r { Some(c) } else { None })
            .collect();
        assert_eq!(cells.len(), 8);
        for c in &cells {
            assert_eq!(c.per_replication.len(), 2);
            assert!(c.per_replication.iter().all(|v| (0.0..=1.0).contains(v)));
            let mean = c.per_replication.iter().sum::<f64>() / 2.0;
            assert!((mean - c.mean_test_ehum).abs() < 1e-15);
        }
        assert!(render(&records).lines().count() == 9);
    }

    #[test]
    fn bad_specs_are_config_errors() {
        assert!(matches!(
            cmd_simulate(&args(&["--scenario", "1", "--d", "3", "--n", "5,5,5", "--reps", "1"])),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            cmd_simulate(&args(&["--scenario", "3", "--d", "401", "--n", "5", "--reps", "1"])),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            cmd_simulate(&args(&["--scenario", "1", "--d", "3", "--n", "5", "--reps", "0"])),
            Err(CliError::Config(_))
        ));
    }
}
