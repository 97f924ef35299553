use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nfcert"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed")
}

fn run(args: &[&str]) -> (i32, Output) {
    let out = bin().args(args).env("NO_COLOR", "1").output().unwrap();
    (out.status.code().unwrap(), out)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn identity_germ_passes_with_exact_certificate() {
    let (code, out) = run(&["-f", "x^3 + y^4"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["schema"], "nfcert/1");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["singularity"]["type"], "E6");
    assert_eq!(r["certificate"]["M"], 0.0);
    assert_eq!(r["certificate"]["R"], 1.0);
    assert_eq!(r["certificate"]["identity"], true);
    assert_eq!(r["verification"]["max_residual"], 0.0);
    assert_eq!(r["verification"]["max_jac_deviation"], 0.0);
    assert_eq!(r["oracle"]["applicable"], true);
    for (_, v) in r["verdicts"].as_object().unwrap() {
        assert_eq!(v, "PASS");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["-f", "x^2 - y^4 + 0.08*x*y^3", "--seed", "11"];
    let (_, a) = run(&args);
    let (_, b) = run(&args);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_changes_sampled_statistics_only() {
    let (_, a) = run(&["-f", "x^3 + y^5 + 0.1*x^4", "--seed", "1"]);
    let (_, b) = run(&["-f", "x^3 + y^5 + 0.1*x^4", "--seed", "2"]);
    let (a, b) = (json(&a), json(&b));
    assert_eq!(a["certificate"], b["certificate"]);
    assert_eq!(
        a["verification"]["max_residual"],
        b["verification"]["max_residual"]
    );
    assert_ne!(
        a["verification"]["min_monotonicity_ratio"],
        b["verification"]["min_monotonicity_ratio"]
    );
}

#[test]
fn malformed_jobs_map_to_exit_codes() {
    let cases = [
        ("bad_expression", 2, "parse"),
        ("domain", 2, "domain"),
        ("incomplete_norms", 2, "invalid_spec"),
        ("missing_function", 2, "invalid_spec"),
        ("negative_r0", 2, "invalid_spec"),
        ("tiny_grid", 2, "invalid_spec"),
        ("truncated", 2, "invalid_spec"),
        ("unknown_field", 2, "invalid_spec"),
        ("wrong_expectation", 3, "classification"),
    ];
    for (name, code, kind) in cases {
        let path = fixtures().join(format!("{name}.json"));
        let (got, out) = run(&["--spec", path.to_str().unwrap()]);
        assert_eq!(got, code, "{name}");
        let r = json(&out);
        assert_eq!(r["exit_code"], code, "{name}");
        assert_eq!(r["error"]["kind"], kind, "{name}");
        assert_eq!(r["name"], name);
    }
}

#[test]
fn parse_errors_carry_an_offset() {
    let (code, out) = run(&["-f", "x^3 + * y^4"]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["offset"], 6);
}

#[test]
fn unsupported_types_exit_with_classification_code() {
    for (path, expect) in [("e7.json", "E7"), ("not_critical.json", "noncritical")] {
        let path = fixtures().join(path);
        let (code, out) = run(&["--spec", path.to_str().unwrap()]);
        assert_eq!(code, 3);
        let r = json(&out);
        assert_eq!(r["status"], "classified");
        assert_eq!(r["singularity"]["type"], expect);
        assert!(r["normalization_skipped"].is_string());
    }
}

#[test]
fn classify_only_succeeds_for_e7() {
    let (code, out) = run(&["-f", "x^3 + x*y^3", "--classify-only"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["status"], "classified");
    assert_eq!(r["singularity"]["type"], "E7");
    assert!(r.get("certificate").is_none());
}

#[test]
fn point_and_radius_overrides() {
    let (code, out) = run(&[
        "-f",
        "(x - 1)^3 + (y + 2)^5 + 4",
        "--point",
        "1,-2",
        "--r0",
        "0.1",
    ]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["point"], serde_json::json!([1.0, -2.0]));
    assert_eq!(r["singularity"]["critical_value"], 4.0);
    assert_eq!(r["certificate"]["R"], 0.1);
}

#[test]
fn csv_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let report = dir.path().join("r.json");
    let (code, _) = run(&[
        "-f",
        "x^2 + y^3 + 0.05*x*y^2",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let mut rd = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["x", "y", "xt", "yt", "residual", "jac_dev"]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let n = r["verification"]["grid_size"].as_u64().unwrap() as usize;
    assert_eq!(rows.len(), n * n);
    let worst = rows
        .iter()
        .map(|row| row[5].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(
        worst,
        r["verification"]["max_jac_deviation"].as_f64().unwrap()
    );
}

#[test]
fn corpus_mode_summarizes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(&[
        "--corpus",
        fixtures().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(code, 3);
    let s = json(&out);
    let files = std::fs::read_dir(fixtures()).unwrap().count();
    assert_eq!(s["jobs"], files);
    assert_eq!(s["classified"], 2);
    assert_eq!(s["fail"], 1);
    assert_eq!(s["errors"]["invalid_spec"], 6);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), files);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains(&format!("{files} jobs")));
}

#[test]
fn missing_input_is_a_usage_error() {
    let (code, _) = run(&[]);
    assert_eq!(code, 2);
    let (code, _) = run(&["--spec", "/nonexistent/job.json"]);
    assert_eq!(code, 1);
}
