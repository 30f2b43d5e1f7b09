use std::process::{Command, Output};

use serde_json::Value;

fn riskdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskdist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = riskdist(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn map_uniform() {
    let out = riskdist(&[
        "map",
        "--family",
        "beta",
        "--mean",
        "0.5",
        "--cstat",
        "0.8333333333",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split(": ").nth(1).unwrap().parse().unwrap()
    };
    assert!((value("alpha:") - 1.0).abs() < 1e-6);
    assert!((value("beta:") - 1.0).abs() < 1e-6);
}

#[test]
fn low_cstat_is_a_domain_error() {
    let out = riskdist(&["map", "--family", "beta", "--mean", "0.5", "--cstat", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("swap the case/control labels"));
}

#[test]
fn eval_beta_one_three() {
    let v = json(&[
        "eval", "--family", "beta", "--p1", "1", "--p2", "3", "--json",
    ]);
    assert_eq!(v["schema_version"], 1);
    assert!((v["mean"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    assert!((v["cstat"].as_f64().unwrap() - 11.0 / 14.0).abs() < 1e-6);
}

#[test]
fn map_then_eval_round_trips() {
    let cases = [
        ("beta", "beta", 0.2, 0.7),
        ("logitnorm", "logitnorm", 0.35, 0.82),
        ("probitnorm", "probitnorm", 0.6, 0.66),
        ("generic", "probitnorm", 0.3, 0.75),
    ];
    for (family, eval_family, m, c) in cases {
        let (ms, cs) = (m.to_string(), c.to_string());
        let mut args = vec![
            "map", "--family", family, "--mean", &ms, "--cstat", &cs, "--json",
        ];
        if family == "generic" {
            args.extend(["--base", eval_family]);
        }
        let solved = json(&args);
        assert_eq!(solved["converged"], true);
        let (p1, p2) = match eval_family {
            "beta" => (
                solved["params"]["alpha"].to_string(),
                solved["params"]["beta"].to_string(),
            ),
            _ => (
                solved["params"]["mu"].to_string(),
                solved["params"]["sigma"].to_string(),
            ),
        };
        let back = json(&[
            "eval",
            "--family",
            eval_family,
            "--p1",
            &p1,
            "--p2",
            &p2,
            "--json",
        ]);
        assert!(
            (back["mean"].as_f64().unwrap() - m).abs() <= 1e-6,
            "{family}"
        );
        assert!(
            (back["cstat"].as_f64().unwrap() - c).abs() <= 1e-6,
            "{family}"
        );
    }
}

#[test]
fn map_reports_diagnostics() {
    let v = json(&[
        "map",
        "--family",
        "logitnorm",
        "--mean",
        "0.1",
        "--cstat",
        "0.995",
        "--json",
    ]);
    for key in [
        "residual_i1",
        "residual_i2",
        "iterations",
        "converged",
        "warning",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["warning"].is_string());
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let out = riskdist(&[
        "map",
        "--family",
        "logitnorm",
        "--mean",
        "0.3",
        "--cstat",
        "0.8",
        "--max-iter",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors() {
    assert_eq!(
        riskdist(&["map", "--family", "beta", "--mean", "abc", "--cstat", "0.7"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(riskdist(&["map", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        riskdist(&["eval", "--family", "gamma", "--p1", "1", "--p2", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(riskdist(&["--help"]).status.code(), Some(0));
}

#[test]
fn eval_rejects_bad_parameters() {
    assert_eq!(
        riskdist(&["eval", "--family", "beta", "--p1", "-1", "--p2", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn counterexamples() {
    let v = json(&["counterexample", "--kind", "mode", "--a", "0.2", "--json"]);
    assert_eq!(v["verified"], true);
    assert_eq!(v["kind"], "mode");
    let v = json(&["counterexample", "--kind", "median", "--a", "0.1", "--json"]);
    assert_eq!(v["verified"], true);
    assert_eq!(
        riskdist(&["counterexample", "--kind", "median", "--a", "0.25"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn grid_to_stdout() {
    let out = riskdist(&[
        "grid",
        "--families",
        "beta",
        "--m-from",
        "0.3",
        "--m-to",
        "0.3",
        "--m-step",
        "0.1",
        "--c-from",
        "0.7",
        "--c-to",
        "0.7",
        "--c-step",
        "0.1",
        "--se",
        "0.01",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "family,m,c,p1,p2,n,m_hat,c_hat,dm,dc,converged,seed"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("beta,0.3,0.7,"));
}

#[test]
fn grid_full_conflicts_with_ranges() {
    assert_eq!(
        riskdist(&["grid", "--full", "--m-from", "0.1"])
            .status
            .code(),
        Some(1)
    );
}
