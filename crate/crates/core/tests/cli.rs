use std::process::{Command, Output};

use serde_json::Value;

fn dfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = dfc(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_header(args: &[&str]) -> String {
    let out = dfc(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .next()
        .unwrap_or_default()
        .to_string()
}

#[test]
fn two_cycle_of_logistic() {
    let v = json(&["cycles", "--map", "logistic:r=3.2", "--period", "2"]);
    assert_eq!(v["schema_version"], 1);
    let cycles = v["cycles"].as_array().unwrap();
    assert_eq!(cycles.len(), 1);
    let points: Vec<f64> = cycles[0]["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_f64().unwrap())
        .collect();
    let r: f64 = 3.2;
    let disc = ((r + 1.0) * (r - 3.0)).sqrt();
    let want = [(r + 1.0 - disc) / (2.0 * r), (r + 1.0 + disc) / (2.0 * r)];
    for (p, w) in points.iter().zip(want) {
        assert!((p - w).abs() < 1e-10);
    }
    let mu = cycles[0]["product"].as_f64().unwrap();
    assert!((mu - (4.0 + 2.0 * r - r * r)).abs() < 1e-9);
}

#[test]
fn every_json_report_carries_schema_version() {
    let runs: [&[&str]; 7] = [
        &["gains", "--N", "3", "--scheme", "dk2013"],
        &["charpoly", "--T", "2", "--N", "2", "--mu", "-1.5"],
        &["stability", "--T", "1", "--N", "3", "--mu", "-2"],
        &[
            "sweep",
            "--T",
            "1",
            "--N",
            "2",
            "--mu-range=-3,1",
            "--mu-step",
            "0.5",
        ],
        &["verify", "--trials", "5"],
        &[
            "interval",
            "--T",
            "1",
            "--N",
            "3",
            "--scheme",
            "dk2013",
            "--theta-grid",
            "10000",
        ],
        &["min-n", "--T", "1", "--mu", "-2.5"],
    ];
    for args in runs {
        let v = json(args);
        assert_eq!(v["schema_version"], 1, "{args:?}");
        let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(again, v);
    }
}

#[test]
fn csv_headers_are_fixed() {
    let cases: [(&[&str], &str); 6] = [
        (
            &["cycles", "--map", "logistic:r=4", "--period", "1"],
            "cycle,j,point,multiplier,product",
        ),
        (
            &["charpoly", "--T", "1", "--N", "2", "--mu", "-2"],
            "kind,index,re,im,modulus",
        ),
        (
            &["stability", "--T", "1", "--N", "2", "--mu", "-2"],
            "mu,spectral_radius,stable,jury_stable,marginal",
        ),
        (&["gains", "--N", "4"], "j,gain"),
        (
            &[
                "sweep",
                "--T",
                "1",
                "--N",
                "2",
                "--mu-range=-2,0",
                "--mu-step",
                "1",
            ],
            "mu,spectral_radius,stable",
        ),
        (
            &[
                "simulate",
                "--map",
                "logistic:r=4",
                "--period",
                "1",
                "--N",
                "3",
                "--init",
                "0.3",
                "--steps",
                "20",
            ],
            "k,x,u",
        ),
    ];
    for (args, header) in cases {
        let mut full = vec!["--format", "csv"];
        full.extend_from_slice(args);
        assert_eq!(csv_header(&full), header, "{args:?}");
    }
}

#[test]
fn dk2013_two_gains() {
    let v = json(&["gains", "--N", "2", "--scheme", "dk2013"]);
    let g: Vec<f64> = v["gains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((g[0] - 2.0 / 3.0).abs() < 1e-12 && (g[1] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn min_n_reports_eight() {
    assert_eq!(json(&["min-n", "--T", "1", "--mu", "-7.5"])["N"], 8);
}

#[test]
fn exit_codes() {
    assert_eq!(dfc(&["gains", "--N", "2"]).status.code(), Some(0));
    let bad_syntax = dfc(&["cycles", "--map", "x +* 2", "--period", "1"]);
    assert_eq!(bad_syntax.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_syntax.stderr).contains("position"));
    assert_eq!(dfc(&["gains", "--N", "0"]).status.code(), Some(2));
    assert_eq!(dfc(&["gains", "--gains", "0.5,0.6"]).status.code(), Some(2));
    assert_eq!(dfc(&["no-such-command"]).status.code(), Some(2));
    let no_cycle = dfc(&[
        "simulate",
        "--map",
        "logistic:r=2.5",
        "--period",
        "2",
        "--N",
        "2",
        "--init",
        "0.3",
    ]);
    assert_eq!(no_cycle.status.code(), Some(1));
    assert_eq!(
        dfc(&["--out", "/nonexistent/dir/x.json", "gains", "--N", "2"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn output_is_deterministic() {
    let runs: [&[&str]; 3] = [
        &["verify", "--trials", "20", "--seed", "9"],
        &[
            "sweep",
            "--T",
            "2",
            "--N",
            "3",
            "--mu-range=-8,1",
            "--mu-step",
            "0.25",
        ],
        &[
            "--format",
            "csv",
            "simulate",
            "--map",
            "logistic:r=4",
            "--period",
            "1",
            "--N",
            "3",
            "--init",
            "0.3",
        ],
    ];
    for args in runs {
        let (a, b) = (dfc(args), dfc(args));
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn stabilize_logistic_fixed_points() {
    let v = json(&["stabilize", "--map", "logistic:r=4", "--period", "1"]);
    let cycles = v["cycles"].as_array().unwrap();
    let origin = cycles
        .iter()
        .find(|c| c["mu"].as_f64() == Some(4.0))
        .unwrap();
    assert_eq!(origin["status"], "not stabilizable by this control");
    let inner = cycles
        .iter()
        .find(|c| (c["mu"].as_f64().unwrap() + 2.0).abs() < 1e-9)
        .unwrap();
    assert_eq!(inner["status"], "stabilized");
    assert_eq!(inner["N"], 3);
    assert_eq!(inner["converged"], true);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("dfc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gains.json");
    let out = dfc(&["--out", path.to_str().unwrap(), "gains", "--N", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["gains"].as_array().unwrap().len(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        dfc(&["verify", "--suite", "jury", "--trials", "50"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(dfc(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}
