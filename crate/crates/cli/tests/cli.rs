use std::path::Path;
use std::process::{Command, Output};

use scor::simgen::{generate, Scenario, ScenarioSpec};
use scor_cli::dataset::Dataset;
use scor_cli::report::{parse_lines, Record};

fn scor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scor")).args(args).output().unwrap()
}

fn records(path: &Path) -> Vec<Record> {
    parse_lines(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn export(dir: &Path, name: &str, seed: u64) -> String {
    let spec = ScenarioSpec::new(Scenario::NormalIndependent, 5, vec![15, 15], seed);
    let path = dir.join(name);
    Dataset::from_sample(&generate(&spec).unwrap()).write(&path).unwrap();
    path.to_str().unwrap().to_string()
}

fn fit_pair(dir: &Path, seed: u64) -> Vec<Record> {
    let train = export(dir, &format!("train{seed}.csv"), 2 * seed);
    let test = export(dir, &format!("test{seed}.csv"), 2 * seed + 1);
    let out = dir.join(format!("fit{seed}.jsonl"));
    let o = scor(&["fit", "--data", &train, "--test", &test, "--method", "all", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("best on test"));
    records(&out)
}

fn test_ehum(recs: &[Record], label: &str) -> f64 {
    recs.iter()
        .find_map(|r| match r {
            Record::Fit(f) if f.method == label => Some(f.test.as_ref().unwrap().ehum),
            _ => None,
        })
        .unwrap()
}

#[test]
fn fit_on_exported_scenario_data() {
    let dir = tempfile::tempdir().unwrap();
    let recs = fit_pair(dir.path(), 0);
    let fits: Vec<_> = recs.iter().filter_map(|r| if let Record::Fit(f) = r { Some(f) } else { None }).collect();
    assert_eq!(fits.len(), 4);
    assert_eq!(fits.iter().filter(|f| f.best).count(), 1);
    assert_eq!(fits[0].coefficients[0].name, "x1");
    assert_eq!(fits[3].coefficients.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["max", "min"]);
    assert!(matches!(recs.last(), Some(Record::FitSummary(s)) if s.classes == 2));
}

#[test]
fn scor_beats_step_down_on_held_out_files() {
    // one file pair is too noisy to order the methods; average over 20
    let dir = tempfile::tempdir().unwrap();
    let (mut scor_sum, mut step_sum) = (0.0, 0.0);
    for seed in 0..20 {
        let recs = fit_pair(dir.path(), seed);
        scor_sum += test_ehum(&recs, "SCOR");
        step_sum += test_ehum(&recs, "Step-down");
    }
    assert!(scor_sum >= step_sum, "SCOR {} vs step-down {}", scor_sum / 20.0, step_sum / 20.0);
}

#[test]
fn merge_labels_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graded.csv");
    let mut text = String::from("grade,a,b\n");
    for i in 0..20 {
        text.push_str(&format!("{},{},{}\n", i % 4, (i % 4) as f64 + 0.01 * i as f64, (i as f64).sin()));
    }
    std::fs::write(&path, text).unwrap();
    let out = dir.path().join("r.jsonl");
    let o = scor(&[
        "fit", "--data", path.to_str().unwrap(), "--method", "scor", "--merge-labels", "2:1,3:1", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = records(&out).into_iter().find_map(|r| if let Record::FitSummary(s) = r { Some(s) } else { None });
    assert_eq!(summary.unwrap().class_sizes, vec![5, 15]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y,a\n0,1\n1,x\n").unwrap();
    let o = scor(&["fit", "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let gap = dir.path().join("gap.csv");
    std::fs::write(&gap, "y,a,b\n0,1,2\n2,1,3\n").unwrap();
    assert_eq!(scor(&["fit", "--data", gap.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(scor(&["fit", "--data", "/nonexistent.csv"]).status.code(), Some(2));
    assert_eq!(scor(&["bench", "--preset", "linear", "--d", "3", "--method", ""]).status.code(), Some(2));
    assert_eq!(scor(&["simulate", "--scenario", "1", "--d", "3", "--n", "5", "--reps", "0"]).status.code(), Some(2));
    assert_eq!(scor(&["nonsense"]).status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_scor"))
        .args(["bench", "--preset", "linear", "--d", "3"])
        .env("SCOR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_failures_map_to_three() {
    assert_eq!(scor_cli::CliError::Numeric("x".into()).exit_code(), 3);
    assert_eq!(scor_cli::CliError::from(scor::Error::NonFiniteObjective(f64::NAN)).exit_code(), 3);
}

#[test]
fn bench_reports_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.jsonl");
    let o = scor(&["bench", "--preset", "quadratic", "--d", "5,20", "--starts", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<_> = records(&out).into_iter().filter_map(|r| if let Record::Bench(b) = r { Some(b) } else { None }).collect();
    assert_eq!(rows.len(), 6);
    for r in rows.iter().filter(|r| r.method == "SCOR") {
        assert!(r.gap.abs() <= 1e-3, "{r:?}");
    }
}

#[test]
fn screen_drops_duplicated_marker() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let mut text = String::from("y,a,a2,b\n");
    for i in 0..30 {
        let a = (i as f64 * 0.7).sin();
        text.push_str(&format!("{},{a},{},{}\n", i % 2, 2.0 * a + 0.01 * (i % 3) as f64, (i as f64 * 1.9).cos()));
    }
    std::fs::write(&path, text).unwrap();
    let out = dir.path().join("kept.csv");
    let rep = dir.path().join("s.jsonl");
    let o = scor(&["screen", "--data", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "--report", rep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let kept = Dataset::read(&out).unwrap();
    assert_eq!(kept.names.len(), 2);
    assert!(kept.names.contains(&"b".to_string()));
    assert!(matches!(&records(&rep)[1], Record::Screen(s) if s.removed.len() == 1 && s.max_abs_correlation < 0.8));
}

#[test]
fn timings_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("p.jsonl");
    let timed = dir.path().join("t.jsonl");
    let base = ["bench", "--preset", "symmetric", "--d", "4", "--out"];
    assert!(scor(&[&base[..], &[plain.to_str().unwrap()]].concat()).status.success());
    assert!(scor(&[&base[..], &[timed.to_str().unwrap(), "--timings"]].concat()).status.success());
    let plain = std::fs::read_to_string(plain).unwrap();
    let timed = std::fs::read_to_string(timed).unwrap();
    assert!(!plain.contains("\"timing\""));
    assert!(timed.contains("\"timing\""));
    assert_eq!(scor_cli::report::canonical(&timed), plain);
}
