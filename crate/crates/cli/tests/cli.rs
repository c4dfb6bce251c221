use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn cantor_cusp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cantor-cusp"))
        .args(args)
        .env("CANTOR_CUSP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON object")
}

#[test]
fn thresholds_row_has_q_upper() {
    let csv = stdout(&cantor_cusp(&["thresholds", "--alpha", "0.7", "--p", "2"]));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(lines.next().is_none());
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    let q: f64 = col("q_upper").parse().unwrap();
    assert!((q - 1.281036851164445).abs() < 1e-12);
    assert_eq!(col("admissible"), "true");
    assert_eq!(col("series_ratio_at_q"), "NA");
}

#[test]
fn threshold_grid_keeps_order() {
    let csv = stdout(&cantor_cusp(&[
        "thresholds",
        "--alpha",
        "0.5",
        "--p-grid",
        "2:6:0.5",
        "--q",
        "2.5",
    ]));
    let ps: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ps, vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0]);
    // q is only reported below p.
    let first = csv.lines().nth(1).unwrap();
    assert!(first.ends_with("NA,NA,NA"), "{first}");
}

#[test]
fn geometry_lists_exact_endpoints() {
    let csv = stdout(&cantor_cusp(&["geometry", "--depth", "2"]));
    assert_eq!(
        csv,
        "n,k,a_num,b_num,level\n1,1,1,2,1\n2,1,1,2,2\n2,2,7,8,2\n"
    );
    let json: Value = serde_json::from_str(&stdout(&cantor_cusp(&[
        "geometry", "--depth", "3", "--format", "json",
    ])))
    .unwrap();
    assert_eq!(json.as_array().unwrap().len(), 7);
}

#[test]
fn psi_reads_a_column_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    fs::write(&input, "x1\n0.1\n0.5\n").unwrap();
    let csv = stdout(&cantor_cusp(&[
        "psi",
        "--alpha",
        "0.7",
        "--input",
        input.to_str().unwrap(),
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x1,psi_lo,psi_hi,derivative_or_NA");
    assert_eq!(lines.len(), 3);
    // 1/2 is the peak of the first cusp, where psi has no derivative.
    assert!(lines[2].ends_with(",NA"));
}

#[test]
fn reflect_reports_zones() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("p.csv");
    fs::write(&points, "x1,x2\n0.4,0.01\n0.4,-0.01\n").unwrap();
    let csv = stdout(&cantor_cusp(&[
        "reflect",
        "--alpha",
        "0.7",
        "--points",
        points.to_str().unwrap(),
    ]));
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row.len(), 6);
        let rx1: f64 = row[2].parse().unwrap();
        assert_eq!(rx1, 0.4);
    }
}

#[test]
fn sharpness_reports_a_divergent_series_at_the_threshold() {
    let json: Value = serde_json::from_str(&stdout(&cantor_cusp(&[
        "sharpness",
        "--alpha",
        "0.7",
        "--p",
        "2",
        "--q",
        "1.281036851164445",
        "--generations",
        "300",
    ])))
    .unwrap();
    assert_eq!(json["verdict"]["verdict"], "divergent");
    assert_eq!(json["verdict"]["kind"], "log_harmonic");
}

#[test]
fn witness_grid_round_trips_through_extend() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let extended = dir.path().join("extended.json");
    let out = cantor_cusp(&[
        "--output",
        grid.to_str().unwrap(),
        "witness-grid",
        "--alpha",
        "0.7",
        "--p",
        "2",
        "--generations",
        "3",
        "--bbox",
        "0:1:-0.3:0.3",
        "--h",
        "0.0078125",
    ]);
    stdout(&out);
    let report: Value = serde_json::from_str(&stdout(&cantor_cusp(&[
        "extend",
        "--alpha",
        "0.7",
        "--p",
        "2",
        "--q",
        "1.2",
        "--input",
        grid.to_str().unwrap(),
        "--grid-output",
        extended.to_str().unwrap(),
    ])))
    .unwrap();
    assert!(report["source"]["sobolev_norm"].as_f64().unwrap() > 0.0);
    assert!(report["ratio"].as_f64().unwrap() > 0.0);
    let e: Value = serde_json::from_slice(&fs::read(&extended).unwrap()).unwrap();
    let source: Value = serde_json::from_slice(&fs::read(&grid).unwrap()).unwrap();
    let filled = |g: &Value| {
        g["values"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|v| !v.is_null())
            .count()
    };
    assert!(filled(&e) > filled(&source));
}

#[test]
fn invalid_input_gives_error_json() {
    let err = error_json(&cantor_cusp(&["thresholds", "--alpha", "1.5", "--p", "2"]));
    assert_eq!(err["kind"], "domain");
    assert!(err["error"].as_str().unwrap().contains("1.5"));

    let err = error_json(&cantor_cusp(&["geometry"]));
    assert_eq!(err["kind"], "usage");

    let err = error_json(&cantor_cusp(&[
        "reflect",
        "--alpha",
        "0.7",
        "--points",
        "/nonexistent.csv",
    ]));
    assert_eq!(err["kind"], "io");

    let err = error_json(&cantor_cusp(&[
        "thresholds",
        "--alpha",
        "0.7",
        "--p-grid",
        "3:1:1",
    ]));
    assert_eq!(err["kind"], "input");
}

#[test]
fn verify_all_is_deterministic_and_exit_matches_report() {
    let args = [
        "verify-all",
        "--alpha",
        "0.7",
        "--check",
        "1",
        "--check",
        "4",
        "--check",
        "6",
    ];
    let first = cantor_cusp(&args);
    let second = cantor_cusp(&args);
    assert_eq!(first.stdout, second.stdout);
    let report: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(report["passed"].as_bool().unwrap(), first.status.success());
    assert_eq!(report["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn full_verify_all_exit_status_matches_report() {
    let out = cantor_cusp(&["verify-all"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"].as_bool().unwrap(), out.status.success());
    assert_eq!(report["checks"].as_array().unwrap().len(), 9);
}
