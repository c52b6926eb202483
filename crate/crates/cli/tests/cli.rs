use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ehrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehrelay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(field: &str) -> Option<f64> {
    if field.is_empty() {
        None
    } else {
        Some(field.parse().unwrap())
    }
}

#[test]
fn rejects_out_of_range_efficiency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"eta": 1.5}"#);
    let out = ehrelay(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0 < η ≤ 1"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"rt\": 1,\n  \"nope\": 2\n}");
    let out = ehrelay(&["optimize", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope") && err.contains("line 3"), "{err}");
}

#[test]
fn usage_and_io_errors_have_distinct_codes() {
    assert_eq!(ehrelay(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        ehrelay(&["sweep", "--axis", "sideways"]).status.code(),
        Some(1)
    );
    assert_eq!(ehrelay(&["sweep"]).status.code(), Some(1));
    assert_eq!(
        ehrelay(&["verify", "--config", "/definitely/missing.json"])
            .status
            .code(),
        Some(3)
    );
    let out = ehrelay(&[
        "optimize",
        "--protocol",
        "ts",
        "--out",
        "/definitely/missing/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(ehrelay(&["--help"]).status.code(), Some(0));
}

#[test]
fn power_sweep_has_one_row_per_grid_point() {
    let out = ehrelay(&["sweep", "--axis", "power", "--grid", "0:30:5"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(
        header,
        [
            "axis",
            "pout_ts",
            "pout_ps",
            "pout_baseline",
            "rho_opt",
            "alpha_opt"
        ]
    );
    assert_eq!(rows.len(), 7);
    let axis: Vec<f64> = rows.iter().map(|r| num(&r[0]).unwrap()).collect();
    assert_eq!(axis, [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
    for col in 1..=3 {
        let v: Vec<f64> = rows.iter().map(|r| num(&r[col]).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]), "column {col}: {v:?}");
        assert!(v.iter().all(|p| (0.0..=1.0).contains(p)));
    }
    for col in 4..=5 {
        assert!(rows.iter().all(|r| {
            let x = num(&r[col]).unwrap();
            x > 0.0 && x < 1.0
        }));
    }
}

#[test]
fn json_and_csv_carry_identical_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("s.csv");
    let json_path = dir.path().join("s.json");
    for (path, fmt) in [(&csv_path, "csv"), (&json_path, "json")] {
        let out = ehrelay(&[
            "sweep",
            "--axis",
            "distance",
            "--grid",
            "0.3:1.9:0.4",
            "--format",
            fmt,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
    }
    let (header, rows) = csv_rows(&fs::read(&csv_path).unwrap());
    let json: Value = serde_json::from_slice(&fs::read(&json_path).unwrap()).unwrap();
    let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
    assert_eq!(keys, header.iter().collect::<Vec<_>>());
    for (j, key) in header.iter().enumerate() {
        let arr = json[key].as_array().unwrap();
        assert_eq!(arr.len(), rows.len());
        for (row, v) in rows.iter().zip(arr) {
            assert_eq!(num(&row[j]), v.as_f64(), "{key}");
        }
    }
    // d_sr = 1.9 lies beyond the far side of the triangle: an empty row, not an abort
    let last = rows.last().unwrap();
    assert_eq!(num(&last[0]), Some(1.9));
    assert!(last[1..].iter().all(String::is_empty));
    assert!(json["pout_ts"][4].is_null());
}

#[test]
fn single_protocol_optimize_is_one_row() {
    let out = ehrelay(&["optimize", "--protocol", "ts"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(
        header,
        [
            "protocol",
            "param_star",
            "pout_star",
            "pout_closed_form",
            "method"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "ts");
    assert_eq!(rows[0][4], "grid");
}

#[test]
fn power_splitting_beats_time_switching_at_default_point() {
    let out = ehrelay(&["optimize"]);
    let (_, rows) = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 2);
    let ts = num(&rows[0][2]).unwrap();
    let ps = num(&rows[1][2]).unwrap();
    assert!(ps <= ts, "PS {ps} vs TS {ts}");
}

#[test]
fn grid_and_golden_optimize_agree() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ehrelay(&["optimize", "--format", "json"]);
    let cfg = write_config(dir.path(), r#"{"method": "golden"}"#);
    let golden = ehrelay(&["optimize", "--format", "json", "--config", &cfg]);
    let a: Value = serde_json::from_slice(&grid.stdout).unwrap();
    let b: Value = serde_json::from_slice(&golden.stdout).unwrap();
    assert_eq!(b["method"][0], "golden");
    for i in 0..2 {
        let (x, y) = (
            a["pout_star"][i].as_f64().unwrap(),
            b["pout_star"][i].as_f64().unwrap(),
        );
        assert!(((x - y) / y).abs() <= 1e-4, "{x} vs {y}");
    }
}

#[test]
fn verify_passes_including_the_no_harvest_point() {
    let out = ehrelay(&[
        "verify",
        "--grid",
        "0:0.9:0.3",
        "--samples",
        "200000",
        "--seed",
        "7",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(
        header,
        [
            "protocol",
            "parameter",
            "closed_form",
            "quadrature",
            "monte_carlo",
            "mc_stderr",
            "agree"
        ]
    );
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[6] == "true"));
    // no harvesting: both analytic paths give the direct-link outage
    let direct = 1.0 - (-(2f64.powf(1.5) - 1.0)).exp();
    for r in rows.iter().filter(|r| r[1] == "0") {
        assert!((num(&r[2]).unwrap() - direct).abs() < 1e-11);
        assert!((num(&r[3]).unwrap() - direct).abs() < 1e-11);
    }
}

#[test]
fn verify_signals_disagreement_with_exit_code_two() {
    // a two-subdivision quadrature budget cannot meet its tolerance
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"max_subdivisions": 1, "n_samples": 1000}"#);
    let out = ehrelay(&[
        "verify",
        "--config",
        &cfg,
        "--protocol",
        "ps",
        "--grid",
        "0.5:0.5:1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (_, rows) = csv_rows(&out.stdout);
    assert_eq!(rows[0][6], "false");
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "verify",
        "--grid",
        "0.2:0.8:0.3",
        "--samples",
        "100000",
        "--seed",
        "3",
    ];
    let a = ehrelay(&args);
    let b = ehrelay(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = ehrelay(&[
        "verify",
        "--grid",
        "0.2:0.8:0.3",
        "--samples",
        "100000",
        "--seed",
        "4",
    ]);
    assert_ne!(a.stdout, c.stdout);
}
