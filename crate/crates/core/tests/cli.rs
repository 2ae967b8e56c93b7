use std::process::{Command, Output};

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .env_remove("CASIMIR_WORKERS")
        .output()
        .expect("binary runs")
}

#[test]
fn vacuum_line() {
    let out = casimir(&["vacuum"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "F0*a^4,-0.0411234\n");
    assert!(out.stderr.is_empty());
}

#[test]
fn eq_csv_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let args = |path: &std::path::Path| {
        vec![
            "eq".to_string(),
            "--at-min".into(),
            "0".into(),
            "--at-max".into(),
            "4".into(),
            "--samples".into(),
            "200".into(),
            "--workers".into(),
            "2".into(),
            "--out".into(),
            path.to_str().unwrap().into(),
        ]
    };
    for path in [&first, &second] {
        let argv: Vec<String> = args(path);
        let out = casimir(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty(), "data went to the output file only");
    }
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&second).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,value,err");
    assert_eq!(lines.len(), 201);
    assert!(lines[1].starts_with("0.00000000000,1.00000000000,"));
    for row in &lines[1..] {
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 3);
        assert!(fields[2] >= 0.0);
    }
}

#[test]
fn worker_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(["eq", "--samples", "5"])
        .env("CASIMIR_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(["eq", "--samples", "5"])
        .env("CASIMIR_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn short_noneq_curve_starts_at_closed_form() {
    let out = casimir(&["noneq", "--t-min", "0", "--t-max", "0.2", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(row[0], 0.0);
    assert!((row[1] - 2.276).abs() <= 0.01);
}

#[test]
fn impossible_tolerance_is_a_numerical_failure() {
    let out = casimir(&[
        "noneq",
        "--t-min",
        "1",
        "--t-max",
        "1.1",
        "--samples",
        "2",
        "--rel-tol",
        "1e-300",
        "--abs-tol",
        "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn verify_report() {
    let out = casimir(&["verify", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("group,max,threshold,status\n"));
    for group in ["tensor_transversality", "transport_residual", "path_agreement"] {
        assert!(
            text.lines().any(|l| l.starts_with(group) && l.ends_with(",PASS")),
            "{group}"
        );
    }
    assert_eq!(
        text,
        String::from_utf8(casimir(&["verify", "--seed", "42"]).stdout).unwrap()
    );
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["eq", "--unknown"],
        vec!["eq", "--samples", "1"],
        vec!["eq", "--at-min", "2", "--at-max", "1"],
        vec!["noneq", "--t-min", "-0.5"],
        vec!["eq", "--samples", "many"],
        vec!["eq", "--rel-tol", "-1"],
        vec!["frobnicate"],
        vec![],
    ] {
        let out = casimir(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero_and_lists_subcommands() {
    let out = casimir(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["vacuum", "eq", "noneq", "verify"] {
        assert!(text.contains(sub), "{sub}");
        assert_eq!(casimir(&[sub, "--help"]).status.code(), Some(0));
    }
}
