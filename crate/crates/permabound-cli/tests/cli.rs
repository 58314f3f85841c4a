//! End-to-end checks of the binary: schema validity, determinism across
//! thread counts, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permabound"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout_json(args: &[&str]) -> serde_json::Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout should be valid JSON")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&doc).unwrap()
}

fn assert_valid(schema_name: &str, value: &serde_json::Value) {
    let validator = schema(schema_name);
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| format!("{e}"))
        .collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn write_matrix(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("permabound-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn bounds_output_matches_schema() {
    let path = write_matrix("u3.csv", "0.2,0.3,0.5\n0.5,0.2,0.3\n0.3,0.5,0.2\n");
    let v = stdout_json(&["bounds", path.to_str().unwrap()]);
    assert_valid("bound_report.schema.json", &v);
    // Identity-style sanity: chain holds in the emitted numbers.
    let per = v["log_per_exact"].as_f64().unwrap();
    let f = v["log_F"].as_f64().unwrap();
    let cw = v["log_max_cw"].as_f64().unwrap();
    assert!(per >= cw - 1e-7 && cw >= f - 1e-7);
}

#[test]
fn bounds_accepts_json_matrices_and_sinkhorn_flag() {
    let path = write_matrix(
        "m2.json",
        r#"{"n": 2, "entries": [[1.0, 1.0], [1.0, 2.0]]}"#,
    );
    let v = stdout_json(&["bounds", path.to_str().unwrap(), "--sinkhorn"]);
    assert_valid("bound_report.schema.json", &v);
    assert!(v["matrix_id"].as_str().unwrap().contains("sinkhorn"));
}

#[test]
fn bounds_writes_iteration_trace() {
    let path = write_matrix("t3.csv", "0.2,0.3,0.5\n0.5,0.2,0.3\n0.3,0.5,0.2\n");
    let trace = std::env::temp_dir().join("permabound-cli-tests/trace.csv");
    let out = run(&[
        "bounds",
        path.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iteration,value,gap"));
    assert!(text.lines().count() >= 2);
}

#[test]
fn verify_output_matches_schema_and_exit_zero() {
    let v = stdout_json(&["verify", "--count", "20", "--n-max", "5"]);
    assert_valid("verify_report.schema.json", &v);
    assert_eq!(v["total_violations"], 0);
    // Single-inequality filter reports just that block.
    let v = stdout_json(&[
        "verify",
        "--count",
        "10",
        "--n-max",
        "4",
        "--inequality",
        "schrijver",
    ]);
    let keys: Vec<&String> = v["inequalities"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["schrijver"]);
}

#[test]
fn counterexample_crossovers() {
    let v = stdout_json(&["counterexample"]);
    assert_valid("counterexample_report.schema.json", &v);
    assert_eq!(v["lms_crossover"], 90);
    assert_eq!(v["sd_crossover"], 42);
    let t = v["s_minus_m_argmax"].as_f64().unwrap();
    assert!((t - 0.721).abs() < 0.01);
}

#[test]
fn almc_enumerate_and_sample_modes() {
    let v = stdout_json(&["almc", "-r", "2", "-n", "4"]);
    assert_valid("almc_report.schema.json", &v);
    assert_eq!(v["violations"], 0);
    assert_eq!(v["matrices"], 282);
    let v = stdout_json(&[
        "almc",
        "-r",
        "3",
        "-n",
        "5",
        "--mode",
        "sample",
        "--samples",
        "50",
    ]);
    assert_valid("almc_report.schema.json", &v);
    assert_eq!(v["violations"], 0);
}

#[test]
fn ratio_scan_families() {
    let v = stdout_json(&["ratio-scan", "--family", "example2", "--n-max", "12"]);
    assert_valid("ratio_scan_report.schema.json", &v);
    // per/F = 2^{n/2} exactly: ratio per n is ln 2 / 2 for every row.
    for row in v["rows"].as_array().unwrap() {
        let ratio = row["ratio_per_n"].as_f64().unwrap();
        assert!((ratio - 0.5 * 2f64.ln()).abs() < 1e-12);
    }
    for family in ["example1", "uniform", "regular"] {
        let v = stdout_json(&[
            "ratio-scan",
            "--family",
            family,
            "--n-min",
            "3",
            "--n-max",
            "8",
        ]);
        assert_valid("ratio_scan_report.schema.json", &v);
    }
}

#[test]
fn probe_reports_and_never_fails() {
    for conjecture in ["strong", "mild", "optimizational", "cap_product"] {
        let v = stdout_json(&[
            "probe",
            "--conjecture",
            conjecture,
            "--count",
            "8",
            "--n-max",
            "4",
        ]);
        assert_valid("probe_report.schema.json", &v);
    }
    let v = stdout_json(&["probe", "--conjecture", "lms"]);
    assert_valid("probe_report.schema.json", &v);
    assert_eq!(v["crossover"], 90);
    let v = stdout_json(&["probe", "--conjecture", "sidak"]);
    assert_eq!(v["crossover"], 42);
    assert!(v["negative_slacks"].as_u64().unwrap() > 0);
}

#[test]
fn sample_output_matches_schema() {
    let v = stdout_json(&[
        "sample",
        "--model",
        "hw",
        "-r",
        "2",
        "-n",
        "6",
        "--samples",
        "200",
        "--estimator",
        "perm",
    ]);
    assert_valid("mc_estimate.schema.json", &v);
    let v = stdout_json(&[
        "sample",
        "--model",
        "bm",
        "-r",
        "2",
        "-n",
        "8",
        "--samples",
        "100",
        "--estimator",
        "emd",
        "-m",
        "3",
    ]);
    assert_valid("mc_estimate.schema.json", &v);
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let a = run(&[
        "--threads",
        "1",
        "verify",
        "--count",
        "30",
        "--n-max",
        "6",
        "--seed",
        "7",
    ]);
    let b = run(&[
        "--threads",
        "4",
        "verify",
        "--count",
        "30",
        "--n-max",
        "6",
        "--seed",
        "7",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&[
        "--threads",
        "1",
        "--seed",
        "3",
        "sample",
        "--model",
        "bm",
        "-r",
        "2",
        "-n",
        "8",
        "--samples",
        "3000",
        "--estimator",
        "perm",
    ]);
    let b = run(&[
        "--threads",
        "3",
        "--seed",
        "3",
        "sample",
        "--model",
        "bm",
        "-r",
        "2",
        "-n",
        "8",
        "--samples",
        "3000",
        "--estimator",
        "perm",
    ]);
    assert_eq!(a.stdout, b.stdout);
    // Different seeds give different streams.
    let c = run(&[
        "--seed",
        "4",
        "sample",
        "--model",
        "bm",
        "-r",
        "2",
        "-n",
        "8",
        "--samples",
        "3000",
        "--estimator",
        "perm",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn error_paths_set_exit_code_two() {
    let out = run(&["bounds", "/definitely/not/a/file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let path = write_matrix("bad.csv", "1,2\n3\n");
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_format_and_out_file() {
    let dir = std::env::temp_dir().join("permabound-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("verify.csv");
    let out = run(&[
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
        "verify",
        "--count",
        "10",
        "--n-max",
        "4",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("inequality,violations,min_slack"));
    // 17 significant digits: a mantissa with 16 fractional digits.
    let line = text.lines().nth(1).unwrap();
    let value = line.split(',').nth(2).unwrap();
    assert!(value.contains('e') && value.split('.').nth(1).unwrap().len() >= 16);
}
