use std::path::PathBuf;
use std::process::Command;

use clap::Parser;
use oscidecay_cli::{run, Cli, SCHEMA};
use serde_json::Value;

const PRESETS: [&str; 4] = ["lightcone6", "flex1", "flex2", "planar3"];

fn report(args: &[&str]) -> oscidecay_cli::Report {
    let cli = Cli::try_parse_from(std::iter::once("oscidecay").chain(args.iter().copied())).unwrap();
    run(&cli).unwrap()
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn no_floats(v: &Value, path: &str) {
    match v {
        Value::Number(n) => assert!(!n.is_f64(), "float at {path}"),
        Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| no_floats(x, &format!("{path}[{i}]"))),
        Value::Object(m) => m.iter().for_each(|(k, x)| no_floats(x, &format!("{path}.{k}"))),
        _ => {}
    }
}

fn exact_cases() -> Vec<(String, Vec<String>)> {
    let mut cases = Vec::new();
    for cmd in ["check-degenerate", "general-position", "strategy"] {
        for p in PRESETS {
            cases.push((format!("{cmd}-{p}"), vec![cmd.to_string(), "--preset".into(), p.into()]));
        }
    }
    let extra: [(&str, &[&str]); 4] = [
        ("hyp-check-lightcone6", &["hyp-check", "--preset", "lightcone6", "--frozen", "z"]),
        ("diff-phase-check-lightcone6", &["diff-phase-check", "--preset", "lightcone6"]),
        ("strategy-cube", &["strategy", "--preset", "lightcone6", "--phase", "x^3"]),
        ("check-degenerate-five-squares", &["check-degenerate", "--preset", "lightcone6", "--phase", "4*x*y + 4*y*z"]),
    ];
    for (name, args) in extra {
        cases.push((name.to_string(), args.iter().map(|s| s.to_string()).collect()));
    }
    cases
}

/// Set `UPDATE_GOLDEN=1` to rewrite the files after an intended change.
#[test]
fn golden_reports() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = golden_dir();
    if update {
        std::fs::create_dir_all(&dir).unwrap();
    }
    for (name, args) in exact_cases() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = report(&args);
        assert_eq!(r.machine["schema"], SCHEMA);
        assert_eq!(r.machine["exit_code"], r.status.code());
        no_floats(&r.machine, &name);
        let path = dir.join(format!("{name}.json"));
        if update {
            std::fs::write(&path, r.json()).unwrap();
        } else {
            let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {name}"));
            assert!(r.json() == want, "{name} differs from its golden file");
        }
    }
}

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_oscidecay")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    bin(args).status.code().unwrap()
}

#[test]
fn exit_statuses() {
    let cases: &[(&[&str], i32)] = &[
        (&["strategy", "--preset", "lightcone6"], 0),
        (&["strategy", "--preset", "lightcone6", "--phase", "x^3"], 0),
        (&["strategy", "--preset", "lightcone6", "--phase", "x*y + y*z"], 1),
        (&["check-degenerate", "--preset", "lightcone6", "--phase", "4*x*y + 4*y*z"], 1),
        (&["check-degenerate", "--preset", "lightcone6"], 0),
        (&["general-position", "--preset", "lightcone6"], 0),
        (&["general-position", "--preset", "flex2"], 1),
        (&["hyp-check", "--preset", "lightcone6", "--frozen", "z"], 0),
        (&["hyp-check", "--preset", "lightcone6", "--phase", "x^3", "--frozen", "z", "--operator", "x; y; x - y"], 1),
        (&["diff-phase-check", "--preset", "lightcone6"], 1),
        (&["diff-phase-check", "--preset", "lightcone6", "--phase", "x^3"], 0),
        (&["strategy", "--preset", "lightcone6", "--phase", "x^2 +* y"], 2),
        (&["strategy", "--preset", "nope"], 2),
        (&["strategy", "--problem", "/nonexistent/problem.toml"], 2),
        (&["strategy", "--preset", "lightcone6", "--bogus"], 2),
        (&["strategy"], 2),
        (&["hyp-check", "--preset", "lightcone6", "--frozen", "q"], 2),
        (&["estimate-decay", "--preset", "flex1"], 2),
    ];
    for (args, want) in cases {
        assert_eq!(code(args), *want, "{args:?}");
    }
}

#[test]
fn parse_errors_name_the_column() {
    let out = bin(&["strategy", "--preset", "lightcone6", "--phase", "x^2 +* y"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("column 6"), "{err}");
}

#[test]
fn strategy_output_is_deterministic() {
    let args = ["strategy", "--preset", "flex1"];
    let a = bin(&args);
    let b = bin(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&args).json(), report(&args).json());
}

#[test]
fn problem_file_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.toml");
    std::fs::write(
        &problem,
        "variables = [\"x\", \"y\"]\nphase = \"x^2*y\"\nfactors = [[1, 0], [0, 1], [1, 1]]\n\
         [cutoff]\nradii = [1.0, 1.0]\n\
         [[numeric_factors]]\nkind = \"gaussian\"\ncenter = 0.0\nwidth = 1.0\n\
         [[numeric_factors]]\nkind = \"gaussian\"\ncenter = 0.0\nwidth = 1.0\n\
         [[numeric_factors]]\nkind = \"constant-one\"\n",
    )
    .unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let p = problem.to_str().unwrap();
    let out = bin(&[
        "estimate-decay", "--problem", p, "--lambda-min", "4", "--lambda-max", "128", "--lambda-steps", "6",
        "--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["schema"], SCHEMA);
    assert_eq!(v["command"], "estimate-decay");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,re,im,abs,envelope"));
    assert_eq!(lines.count(), 6);

    assert_eq!(code(&["general-position", "--problem", p]), 0);
}
