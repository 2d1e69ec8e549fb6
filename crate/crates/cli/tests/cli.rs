use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evcond::ScanCurve;
use evcond_cli::report::{read_quantile_grid, read_type_one, QuantileReport, ScanReport, TestReport, SCHEMA_VERSION};
use tempfile::TempDir;

fn evcond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evcond"))
        .args(args)
        .env_remove("EVCOND_THREADS")
        .output()
        .expect("binary runs")
}

fn gen(dir: &Path, model: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("{model}-{n}-{seed}.txt"));
    let out = evcond(&[
        "gen",
        model,
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_is_deterministic_and_annotated() {
    let a = evcond(&["gen", "cauchy", "300", "--seed", "7"]);
    let b = evcond(&["gen", "cauchy", "300", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let s = text(&a);
    assert!(s.starts_with("# model=cauchy n=300 seed=7\n"));
    assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 300);
    assert_ne!(a.stdout, evcond(&["gen", "cauchy", "300", "--seed", "8"]).stdout);
}

#[test]
fn generated_values_stay_in_the_unit_square() {
    for (model, extra) in [("gumbel", vec!["--theta", "10"]), ("alternative", vec![])] {
        let mut args = vec!["gen", model, "500"];
        args.extend(extra);
        let s = text(&evcond(&args));
        for line in s.lines().filter(|l| !l.starts_with('#')) {
            let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
            assert!(v.iter().all(|&x| x > 0.0 && x <= 1.0), "{model}: {line}");
        }
    }
    assert!(text(&evcond(&["gen", "gumbel", "10", "--theta", "3"])).contains("# theta=3"));
}

#[test]
fn run_reports_round_trip_and_exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let null = gen(dir.path(), "cauchy", 1500, 2);
    let out = evcond(&[
        "run",
        null.to_str().unwrap(),
        "--k",
        "100",
        "--reps",
        "500",
        "--seed",
        "4",
    ]);
    let report: TestReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.schema_version, SCHEMA_VERSION);
    assert_eq!((report.n, report.k, report.reps, report.seed), (1500, 100, 500, 4));
    assert_eq!(report.reject, report.statistic >= report.quantile);
    assert_eq!(out.status.code(), Some(report.reject as i32));
    assert!(report.timing.is_none());
    // re-serialising reproduces the emitted document
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again.as_bytes(), &out.stdout[..]);

    let csv = evcond(&[
        "run",
        null.to_str().unwrap(),
        "--k",
        "100",
        "--reps",
        "500",
        "--seed",
        "4",
        "--format",
        "csv",
    ]);
    let parsed = TestReport::read_csv(&csv.stdout[..]).unwrap();
    assert_eq!(parsed, report);

    let alt = gen(dir.path(), "alternative", 2000, 5);
    let out = evcond(&["run", alt.to_str().unwrap(), "--k", "200", "--reps", "500"]);
    let report: TestReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.reject, "{report:?}");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn timing_is_opt_in() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cauchy", 400, 1);
    let out = evcond(&["run", p.to_str().unwrap(), "--k", "40", "--reps", "200", "--timing"]);
    let report: TestReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.timing.unwrap().simulation_ms > 0.0);
}

#[test]
fn configuration_and_input_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cauchy", 200, 1);
    let p = p.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", p, "--k", "20", "--alpha", "1.5"],
        vec!["run", p, "--k", "200"],
        vec!["run", p, "--k", "20", "--beta", "3"],
        vec!["run", p, "--k", "20", "--reps", "10"],
        vec!["run", p, "--k", "20", "--grid", "5"],
        vec!["run", p, "--k", "20", "--workers", "0"],
        vec!["run", "/nonexistent/sample.txt", "--k", "20"],
        vec!["scan", p, "--k-list", "50,20"],
        vec!["table2", "--reps", "0"],
        vec!["gen", "normal", "100"],
        vec!["quantiles", "--mode", "estimated"],
    ];
    for args in cases {
        let out = evcond(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2\n3 4\n5\n6 7\n8 9\n").unwrap();
    let out = evcond(&["run", bad.to_str().unwrap(), "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn thread_cap_must_be_a_number() {
    let out = Command::new(env!("CARGO_BIN_EXE_evcond"))
        .args([
            "table1",
            "--reps",
            "100",
            "--grid",
            "20",
            "--theta-grid",
            "20",
            "--mesh-cells",
            "50",
        ])
        .env("EVCOND_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_writes_csv_json_and_two_series_svg() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cauchy", 600, 3);
    let svg = dir.path().join("scan.svg");
    let p = p.to_str().unwrap();
    let out = evcond(&[
        "scan",
        p,
        "--k-list",
        "50,100",
        "--reps",
        "200",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = ScanCurve::read_csv(&out.stdout[..]).unwrap();
    assert_eq!(curve.entries.len(), 2);
    assert!(curve.entries.iter().all(|e| e.quantile.is_some() && e.statistic >= 0.0));

    let doc = std::fs::read_to_string(&svg).unwrap();
    let tree = roxmltree::Document::parse(&doc).unwrap();
    assert_eq!(tree.root_element().tag_name().name(), "svg");
    assert_eq!(tree.descendants().filter(|n| n.has_tag_name("polyline")).count(), 2);

    let json = evcond(&["scan", p, "--k-list", "50,100", "--reps", "200", "--format", "json"]);
    let report: ScanReport = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(report.entries.len(), 2);
    assert_eq!(report.entries[1].statistic, curve.entries[1].statistic);
    assert_eq!(report.entries[1].quantile, curve.entries[1].quantile);

    // default k list for n = 600: 50, 100, …, 250
    let plain = evcond(&["scan", p, "--no-quantile"]);
    let curve = ScanCurve::read_csv(&plain.stdout[..]).unwrap();
    assert_eq!(
        curve.entries.iter().map(|e| e.k).collect::<Vec<_>>(),
        vec![50, 100, 150, 200, 250]
    );
    assert!(curve.entries.iter().all(|e| e.quantile.is_none()));
}

#[test]
fn table1_rows_are_monotone_and_round_trip() {
    let args = [
        "table1",
        "--reps",
        "200",
        "--grid",
        "40",
        "--theta-grid",
        "40",
        "--mesh-cells",
        "50",
        "--seed",
        "2",
    ];
    let out = evcond(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (probs, rows) = read_quantile_grid(&out.stdout[..]).unwrap();
    assert_eq!(probs, evcond::limit::TABLE_PROBS.to_vec());
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
    for (_, q) in &rows {
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
    }
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let report: QuantileReport = serde_json::from_slice(&evcond(&json_args).stdout).unwrap();
    for ((_, q), t) in rows.iter().zip(&report.tables) {
        assert_eq!(q, &t.rows.iter().map(|r| r.1).collect::<Vec<_>>());
    }
}

#[test]
fn table2_reports_rates_against_a_given_critical_value() {
    let out = evcond(&[
        "table2",
        "--n",
        "400",
        "--k-list",
        "20,40",
        "--reps",
        "20",
        "--critical",
        "0.447",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_type_one(&out.stdout[..]).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.alpha_hat) && r.q50 <= r.q95 && r.samples == 20);
    }
}

#[test]
fn quantiles_in_estimated_mode() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cauchy", 500, 9);
    let out = evcond(&[
        "quantiles",
        "--mode",
        "estimated",
        "--sample",
        p.to_str().unwrap(),
        "--k",
        "50",
        "--reps",
        "200",
        "--probs",
        "0.5,0.95",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (probs, rows) = read_quantile_grid(&out.stdout[..]).unwrap();
    assert_eq!(probs, vec![0.5, 0.95]);
    assert!(rows[0].1[0] <= rows[0].1[1]);
}
