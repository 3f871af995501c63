use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(args)
        .env_remove("HARDY_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|err| panic!("{err}: {}", stdout(out)))
}

fn labelled(report: &Value, list: &str, label: &str) -> f64 {
    report[list]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["label"] == label)
        .unwrap_or_else(|| panic!("no {label} in {list}"))["value"]
        .as_f64()
        .unwrap()
}

fn write_problem(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("hardy-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

const GEOMETRIC: &[&str] = &["--family", "geometric", "--gamma", "0.5", "--b", "1", "--p", "2", "--q", "2", "--N", "400"];

fn with(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn bound_geometric() {
    let out = hardy(&with(&["bound"], GEOMETRIC));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert!((r["B"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!((labelled(&r, "upper_bounds", "k_qp_times_B") - 4.0).abs() < 1e-6);
    assert!((labelled(&r, "upper_bounds", "delta_1") - 3.414).abs() < 1e-3);
    for list in ["lower_bounds", "upper_bounds", "reference"] {
        for v in r[list].as_array().unwrap() {
            let m = v["method"].as_str().unwrap();
            assert!(["closed-form", "truncated-sum", "oracle", "refinement"].contains(&m));
        }
    }
}

#[test]
fn bound_bliss() {
    let out = hardy(&["bound", "--family", "bliss", "--p", "2", "--q", "4", "--N", "2000"]);
    assert!(out.status.success());
    let r = json(&out);
    assert!((r["B"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!((labelled(&r, "upper_bounds", "k_qp_times_B") - 1.316).abs() < 1e-3);
}

#[test]
fn bound_with_oracle_from_file() {
    let path = write_problem(
        "oracle",
        r#"{"p": 1.5, "q": 3, "u": [1, 0.5, 2, 1], "v": [2, 1, 1, 3], "options": {"oracle": true}}"#,
    );
    let out = hardy(&["bound", path.to_str().unwrap()]);
    assert!(out.status.success());
    let r = json(&out);
    let a = labelled(&r, "lower_bounds", "oracle");
    assert!(a >= r["B"].as_f64().unwrap());
    assert!(a <= labelled(&r, "upper_bounds", "delta_1"));
}

#[test]
fn malformed_file_exits_2() {
    let path = write_problem("bad", "{\n  \"p\": 2,\n  \"q\": 2,\n  \"u\": [1, 2\n}");
    let out = hardy(&["bound", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let path = write_problem("field", r#"{"p": 0.5, "q": 2, "u": [1], "v": [1]}"#);
    let out = hardy(&["bound", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field `p`"));

    let out = hardy(&["bound", "--family", "geometric", "--p", "2", "--q", "2", "--N", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergent_truncation_exits_3() {
    let path = write_problem(
        "diverge",
        r#"{"p": 2, "q": 3, "family": {"kind": "constant", "u": 1, "v": 1},
            "truncation": {"mode": "doubling", "start": 8, "n_max": 256, "tail_tolerance": 1e-8}}"#,
    );
    let out = hardy(&["bound", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let r = json(&out);
    assert_eq!(r["residuals"]["truncation_converged"], false);
}

#[test]
fn refine_geometric_trace() {
    let out = hardy(&with(&["refine"], &with(GEOMETRIC, &["--m", "3", "--tol", "0"])));
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "m,delta_m,delta_m_index,delta_tilde_m,delta_tilde_k,delta_bar_m,delta_bar_k"
    );
    for line in lines {
        let delta: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((delta - 3.414).abs() < 1e-3, "{line}");
    }
}

#[test]
fn refine_single_row() {
    let out = hardy(&with(&["refine"], &with(GEOMETRIC, &["--m", "1"])));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn refine_random_instance_non_increasing() {
    let path = write_problem(
        "random8",
        r#"{"p": 1.7, "q": 3.1, "u": [0.4, 1.9, 0.7, 2.2, 0.3, 1.1, 0.8, 1.5],
            "v": [1.2, 0.6, 2.4, 0.9, 1.7, 0.5, 1.3, 2.0], "options": {"m": 10, "tol": 0}}"#,
    );
    for weighted in [false, true] {
        let mut args = vec!["refine", path.to_str().unwrap()];
        if weighted {
            args.push("--weighted-inner-sum");
        }
        let out = hardy(&args);
        assert!(out.status.success());
        let deltas: Vec<f64> = stdout(&out)
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(!deltas.is_empty());
        for w in deltas.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{deltas:?}");
        }
    }
}

#[test]
fn oracle_is_deterministic_and_thread_independent() {
    let args = with(&["oracle"], &with(GEOMETRIC, &["--seed", "7"]));
    let a = hardy(&args);
    let b = hardy(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(&args)
        .env("HARDY_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
    let r = json(&a);
    assert!(r["monotone"]["passed"].as_bool().unwrap());
    let x: Vec<f64> = r["x_star"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn oracle_agrees_with_eigenvalue_method() {
    let path = write_problem(
        "p2q2",
        r#"{"p": 2, "q": 2, "u": [0.4, 1.9, 0.7, 2.2, 0.3, 1.1], "v": [1.2, 0.6, 2.4, 0.9, 1.7, 0.5]}"#,
    );
    let fp = json(&hardy(&["oracle", path.to_str().unwrap()]));
    let ev = json(&hardy(&["oracle", path.to_str().unwrap(), "--method", "eigen_p2q2"]));
    let (a, b) = (fp["A_est"].as_f64().unwrap(), ev["A_est"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
}

#[test]
fn examples_run() {
    let out = hardy(&["example", "geometric"]);
    assert!(out.status.success());
    let r = json(&out);
    assert!((labelled(&r, "lower_bounds", "oracle") - 3.414).abs() < 1e-2);
    let out = hardy(&["example", "bliss", "--N", "500"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["truncation_used"], 500);
}

#[test]
fn selftest_passes_and_catches_fault() {
    let out = hardy(&["selftest"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS sandwich_unweighted_inner_sum"));
    assert!(text.contains("PASS sandwich_weighted_inner_sum"));

    let out = hardy(&["selftest", "--inject-fault", "k-exceeds-tilde-k"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("FAIL factor_grid"));
}
