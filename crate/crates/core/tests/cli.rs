use std::process::Command;

use qchan::cli::run;
use serde_json::Value;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qchan").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_spec(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn check_axioms_computational() {
    let (code, out, _) = run_cli(&["check-axioms", "--basis", "computational", "--dim", "3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
    for (_, e) in v["errors"].as_object().unwrap() {
        assert!(e.as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn check_axioms_random_basis_from_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(&dir, "basis.json", r#"{"basis": "random", "dim": 4}"#);
    let (code, out, _) = run_cli(&["check-axioms", "--spec", &spec, "--seed", "7"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dim"], 4);
}

#[test]
fn scaling_csv_rows() {
    let (code, out, _) = run_cli(&["scaling", "--n-max", "6", "--gammas", "0,0.5", "--seed", "42", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,protocol,gamma,qfi,delta_phi");
    assert_eq!(lines.len(), 1 + 6 * 2 * 3);
    let ghz4 = lines
        .iter()
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|c| c[0] == "4" && c[1] == "ghz_parallel" && c[2].parse::<f64>().unwrap() == 0.0)
        .unwrap();
    assert!((ghz4[3].parse::<f64>().unwrap() - 16.0).abs() < 1e-6);
}

#[test]
fn scaling_json_metadata_and_determinism() {
    let args = ["scaling", "--n-max", "3", "--gammas", "0.5,0", "--seed", "5"];
    let (code, a, _) = run_cli(&args);
    let (_, b, _) = run_cli(&args);
    assert_eq!(code, 0);
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["metadata"]["seed"], 5);
    assert_eq!(v["metadata"]["h"], 1e-5);
    assert_eq!(v["rows"].as_array().unwrap().len(), 18);
    assert_eq!(v["rows"][0]["gamma"], 0.0);
}

#[test]
fn out_flag_writes_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let args = ["scaling", "--n-max", "2", "--format", "csv"];
    let (_, stdout, _) = run_cli(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    with_out.extend(["--out", &p]);
    let (code, nothing, _) = run_cli(&with_out);
    assert_eq!(code, 0);
    assert!(nothing.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn equivalence_ghz3_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        &dir,
        "ghz3.json",
        r#"{"basis": "computational", "n": 3,
            "channels": [{"type": "qubit_dephasing", "gamma": 0.2, "phi": 0.4}],
            "input_state": "plus"}"#,
    );
    let (code, out, _) = run_cli(&["equivalence", "--spec", &spec, "--tol", "1e-10"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["kind"], "channel");
    assert!((v["output_trace"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn equivalence_fourier_family_and_operators() {
    let dir = tempfile::tempdir().unwrap();
    let chans = write_spec(
        &dir,
        "family.json",
        r#"{"basis": "fourier", "channels": [
              {"type": "dephasing_family", "phases": [0.1, 0.2, 0.3], "weights": [0.5, 0.3, 0.2]},
              {"type": "pure_phase", "phases": [1.0, 0.0, -1.0]}],
            "permutation": [1, 0], "input_state": "maximally_mixed"}"#,
    );
    assert_eq!(run_cli(&["equivalence", "--spec", &chans]).0, 0);

    let ops = write_spec(
        &dir,
        "ops.json",
        r#"{"n": 4, "operators": [{"phases": [0.3, -0.2]}], "permutation": [3, 1, 0, 2]}"#,
    );
    let (code, out, _) = run_cli(&["equivalence", "--spec", &ops]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["kind"], "operator");
}

#[test]
fn non_commuting_operators_fail_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        &dir,
        "xz.json",
        r#"{"operators": [
              {"rows": 2, "cols": 2, "entries": [[0,0],[1,0],[1,0],[0,0]]},
              {"rows": 2, "cols": 2, "entries": [[1,0],[0,0],[0,0],[-1,0]]}]}"#,
    );
    let (code, out, err) = run_cli(&["equivalence", "--spec", &spec]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], false);
    assert!(v["commutation_defects"][0].as_f64().unwrap() > 0.1);
    assert!(err.contains("check failed"));
}

#[test]
fn input_errors_exit_two() {
    let (code, _, err) = run_cli(&["equivalence", "--spec", "/definitely/not/here.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("/definitely/not/here.json"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(&dir, "bad.json", "{\"n\": 3,\n \"channels\": [");
    let (code, _, err) = run_cli(&["equivalence", "--spec", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");

    let unknown = write_spec(&dir, "unknown.json", r#"{"channels": [{"type": "amplitude_damping", "gamma": 1}]}"#);
    assert_eq!(run_cli(&["equivalence", "--spec", &unknown]).0, 2);

    assert_eq!(run_cli(&["check-axioms", "--tol", "-1"]).0, 2);
    assert_eq!(run_cli(&["check-axioms", "--basis", "wavelet"]).0, 2);
    assert_eq!(run_cli(&["qfi", "--protocol", "squeezed"]).0, 2);
    assert_eq!(run_cli(&["scaling", "--n-max", "9"]).0, 2);
    assert_eq!(run_cli(&["frobnicate"]).0, 2);
}

#[test]
fn channel_report_round_trips_matrices() {
    let (code, out, _) = run_cli(&["channel", "--gamma", "0.25", "--phi", "0.7"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["kraus"].as_array().unwrap().len(), 2);
    let entries: Vec<[f64; 2]> = serde_json::from_value(v["output_state"]["entries"].clone()).unwrap();
    // ½ e^{-γ+iφ} in the upper off-diagonal.
    let expected = num_complex::Complex64::from_polar(0.5 * (-0.25f64).exp(), 0.7);
    assert!((entries[1][0] - expected.re).abs() < 1e-15);
    assert!((entries[1][1] - expected.im).abs() < 1e-15);

    let cs = qchan::classical::ClassicalStructure::computational(2);
    let b = qchan::channels::qubit_dephasing_b(0.25, 0.7).unwrap();
    let plus = qchan::matrix::ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let direct = qchan::channels::apply_schur(&cs, &b, &plus).unwrap();
    for (z, [re, im]) in direct.as_slice().iter().zip(&entries) {
        assert_eq!(z.re.to_bits(), re.to_bits());
        assert_eq!(z.im.to_bits(), im.to_bits());
    }
}

#[test]
fn channel_spec_with_kraus_operators() {
    let dir = tempfile::tempdir().unwrap();
    let s = 0.5f64.sqrt();
    let body = format!(
        r#"{{"channel": {{"type": "kraus", "operators": [
              {{"rows": 2, "cols": 2, "entries": [[{s},0],[0,0],[0,0],[{s},0]]}},
              {{"rows": 2, "cols": 2, "entries": [[{s},0],[0,0],[0,0],[-{s},0]]}}]}}}}"#
    );
    let spec = write_spec(&dir, "kraus.json", &body);
    let (code, out, _) = run_cli(&["channel", "--spec", &spec, "--format", "csv"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("quantity,value\n"));
}

#[test]
fn qfi_command() {
    let (code, out, _) = run_cli(&["qfi", "--protocol", "sequential", "--n", "5", "--gamma", "0.1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let expected = 25.0 * (-1.0f64).exp();
    assert!((v["qfi"].as_f64().unwrap() - expected).abs() < 1e-8);
    assert_eq!(v["method"], "analytic_derivative");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qchan");
    let ok = Command::new(bin).args(["check-axioms", "--dim", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["equivalence"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--spec"));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
