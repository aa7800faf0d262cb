use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }
}

fn mahler(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mahler"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn volume_examples() {
    let ws = Workspace::new();
    let d = ws.dir.path();
    ws.file("cube.json", r#"{"type":"cube","dim":3}"#);
    ws.file("l2.json", r#"{"type":"lp_ball","p":2,"dim":4}"#);
    ws.file(
        "cap.json",
        r#"{"op":"cap_p","p":2,"args":[{"type":"cube","dim":2},{"type":"cross","dim":2}]}"#,
    );

    let v = json(&mahler(&["volume", "cube.json"], d));
    assert_eq!(f(&v["result"]["value"]), 8.0);
    assert_eq!(v["result"]["method"], "exact");
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["config"]["samples"], 200_000);

    let v = json(&mahler(&["volume", "l2.json"], d));
    assert!((f(&v["result"]["value"]) - 4.934_802_200_54).abs() < 1e-10);

    let v = json(&mahler(&["volume", "cap.json", "--force-mc"], d));
    let (value, ci) = (f(&v["result"]["value"]), f(&v["result"]["ci95"]));
    assert!(ci > 0.0);
    assert_eq!(v["result"]["method"], "monte-carlo");
    // area by adaptive quadrature of the boundary curve
    assert!(
        (value - 1.287_002_217_586_568_8).abs() <= 3.0 * ci,
        "{value} ± {ci}"
    );
}

#[test]
fn mahler_examples() {
    let ws = Workspace::new();
    let d = ws.dir.path();
    ws.file("ball.json", r#"{"type":"ball","dim":3}"#);
    ws.file("cube.json", r#"{"type":"cube","dim":4}"#);
    ws.file("cross.json", r#"{"type":"cross","dim":4}"#);

    let v = json(&mahler(&["mahler", "ball.json"], d));
    assert_eq!(v["pass"], true);
    assert!((f(&v["result"]["s"]) - 1.0).abs() < 1e-11);

    let cube = json(&mahler(&["mahler", "cube.json"], d));
    assert_eq!(cube["pass"], true);
    assert!((f(&cube["result"]["s"]) - 0.438_015_242_867).abs() < 1e-11);
    assert_eq!(f(&cube["result"]["bound"]), 0.0625);
    assert_eq!(f(&cube["result"]["corollary_bound"]), 0.0625);

    let cross = json(&mahler(&["mahler", "cross.json"], d));
    assert_eq!(cross["result"]["s"], cube["result"]["s"]);
}

#[test]
fn verify_chain_examples() {
    let ws = Workspace::new();
    let d = ws.dir.path();
    ws.file("square.json", r#"{"type":"cube","dim":2}"#);
    ws.file("e1.json", r#"{"type":"ball","dim":2,"radius":0.1}"#);
    ws.file(
        "e2.json",
        r#"{"type":"ball","dim":2,"radius":1.4142135623730951}"#,
    );
    ws.file("ball.json", r#"{"type":"ball","dim":2}"#);
    ws.file("cube3.json", r#"{"type":"cube","dim":3}"#);

    let v = json(&mahler(
        &[
            "verify-chain",
            "square.json",
            "--e1",
            "e1.json",
            "--e2",
            "e2.json",
        ],
        d,
    ));
    assert_eq!(v["pass"], true);
    assert_eq!(v["result"]["recursion_levels"], 1);
    assert!((f(&v["result"]["final_bound"]) - 0.017_114_924_378_5).abs() < 1e-12);

    let v = json(&mahler(&["verify-chain", "ball.json"], d));
    assert_eq!(v["result"]["recursion_levels"], 0);
    assert_eq!(f(&v["result"]["measured_product_ratio"]), 1.0);

    let v = json(&mahler(&["verify-chain", "cube3.json"], d));
    assert_eq!(v["result"]["recursion_levels"], 0);
    assert_eq!(v["result"]["final_bound_kind"], "direct");
}

#[test]
fn failing_checks_exit_nonzero() {
    let ws = Workspace::new();
    let d = ws.dir.path();
    ws.file("square.json", r#"{"type":"cube","dim":2}"#);
    ws.file("e1.json", r#"{"type":"ball","dim":2,"radius":0.1}"#);
    // the unit disk does not contain the square
    ws.file("e2.json", r#"{"type":"ball","dim":2,"radius":1}"#);
    let out = mahler(
        &[
            "verify-chain",
            "square.json",
            "--e1",
            "e1.json",
            "--e2",
            "e2.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn bound_table_examples() {
    let d = std::env::temp_dir();
    let out = mahler(
        &[
            "bound-table",
            "--n-min",
            "4",
            "--n-max",
            "8",
            "--format",
            "csv",
        ],
        &d,
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# mahler-bound-table v1\n# config "));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('n'))
        .map(|l| {
            l.split(',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], vec![4.0, 0.0625]);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));

    let v = json(&mahler(
        &["bound-table", "--n-min", "16", "--n-max", "16"],
        &d,
    ));
    assert!((f(&v["result"]["rows"][0]["corollary"]) - 2.328_306_436_54e-10).abs() < 1e-20);
}

#[test]
fn mvee_examples() {
    let ws = Workspace::new();
    let d = ws.dir.path();
    ws.file("square.txt", "# square\n1 1\n1 -1\n-1 1\n-1 -1\n");
    ws.file("rhombus.json", "[[2,0],[-2,0],[0,1],[0,-1]]");
    ws.file("cube3.json", r#"{"type":"cube","dim":3}"#);
    let check = |v: &Value, expected: &[&[f64]]| {
        for (row, e) in v["result"]["matrix"]
            .as_array()
            .unwrap()
            .iter()
            .zip(expected)
        {
            for (a, b) in row.as_array().unwrap().iter().zip(e.iter()) {
                assert!((f(a) - b).abs() < 1e-6, "{v}");
            }
        }
    };
    check(
        &json(&mahler(&["mvee", "square.txt", "--points"], d)),
        &[&[0.5, 0.0], &[0.0, 0.5]],
    );
    check(
        &json(&mahler(&["mvee", "rhombus.json", "--points"], d)),
        &[&[0.25, 0.0], &[0.0, 1.0]],
    );
    let third = 1.0 / 3.0;
    check(
        &json(&mahler(&["mvee", "cube3.json"], d)),
        &[&[third, 0.0, 0.0], &[0.0, third, 0.0], &[0.0, 0.0, third]],
    );
}

#[test]
fn input_errors_are_diagnosed() {
    let ws = Workspace::new();
    let d = ws.dir.path();
    ws.file("syntax.json", "{\"type\": \"cube\",\n \"dim\": }");
    ws.file(
        "field.json",
        r#"{"op":"polar","args":[{"type":"cube","dim":0}]}"#,
    );
    let out = mahler(&["volume", "syntax.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = mahler(&["volume", "field.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.args[0]"));
    let out = mahler(&["volume", "missing.json"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_reproducible_and_written_to_out() {
    let ws = Workspace::new();
    let d = ws.dir.path();
    ws.file(
        "cap.json",
        r#"{"op":"cap_p","p":2,"args":[{"type":"cube","dim":2},{"type":"cross","dim":2}]}"#,
    );
    let args = [
        "volume",
        "cap.json",
        "--force-mc",
        "--seed",
        "9",
        "--samples",
        "50000",
    ];
    let a = mahler(&args, d);
    let b = mahler(&[&args[..], &["--threads", "1"]].concat(), d);
    assert_eq!(a.stdout, b.stdout);
    let out = mahler(&[&args[..], &["--out", "report.json"]].concat(), d);
    assert!(out.status.success() && out.stdout.is_empty());
    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(written["config"]["seed"], 9);
    assert_eq!(written["config"]["out"], "report.json");
}
