//! End-to-end checks of the `povm` binary: exit codes, pinned demo
//! output, canonical JSON round trips, and tolerance overrides.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndarray::array;
use num_complex::Complex64 as C64;

use povm_core::{
    model_from_json, model_to_canonical_json, save_model, DiscretePOVM, HermitianMatrix, Model,
};

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn povm_cmd() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_povm"));
    cmd.env_remove("POVM_TOL");
    cmd
}

fn run(args: &[&str]) -> Output {
    povm_cmd().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// A two-level three-outcome POVM whose first two effects do not
/// commute (halved projections onto slanted and straight directions).
fn noncommutative_povm() -> DiscretePOVM {
    let half = C64::new(0.5, 0.0);
    let plus = HermitianMatrix::new(array![[half, half], [half, half]]).unwrap();
    let f1 = plus.scaled(0.5);
    let f2 = HermitianMatrix::from_diagonal(&[0.5, 0.0]);
    let f3 = &(&HermitianMatrix::identity(2) - &f1) - &f2;
    DiscretePOVM::new(vec![1.0, 2.0, 3.0], vec![f1, f2, f3]).unwrap()
}

#[test]
fn validate_accepts_every_model_kind() {
    for (file, marker) in [
        ("diagonal_triple.json", "valid povm"),
        ("spin_one_z.json", "valid pv"),
        ("maximally_mixed_qubit.json", "valid density"),
        ("ancilla_misregistration.json", "valid ancilla_model"),
    ] {
        let out = run(&["validate", data_file(file).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{file}");
        assert!(stdout_of(&out).contains(marker), "{file}");
    }
}

#[test]
fn canonical_json_round_trips_bytes() {
    for file in [
        "misregistered_spin_half.json",
        "diagonal_triple.json",
        "spin_one_z.json",
        "up_projection.json",
        "maximally_mixed_qubit.json",
        "ancilla_misregistration.json",
    ] {
        let path = data_file(file);
        let text = std::fs::read_to_string(&path).unwrap();
        let model = model_from_json(&text, path.to_str().unwrap()).unwrap();
        assert_eq!(model_to_canonical_json(&model), text, "{file}");
    }
}

#[test]
fn parse_error_reports_position_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"schema_version\": ").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 1"), "stderr: {err}");
    assert!(err.contains("column"), "stderr: {err}");
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["validate", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_schema_version_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("future.json");
    std::fs::write(&path, "{\"schema_version\": \"povm/9\", \"kind\": \"povm\"}").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("povm/9"));
}

#[test]
fn wrong_model_kind_exits_two() {
    let povm = data_file("diagonal_triple.json");
    let out = run(&[
        "unsharp",
        "--def",
        "11",
        "--sharp",
        povm.to_str().unwrap(),
        povm.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("expected kind `pv`"));
}

#[test]
fn noncommutative_input_exits_one_and_tolerance_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slanted.json");
    save_model(&path, &Model::Povm(noncommutative_povm())).unwrap();
    let file = path.to_str().unwrap();

    let strict = run(&["commutes", file]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(stdout_of(&strict).contains("commutative: false"));

    // No reconstruction exists for it either.
    let recon = run(&["reconstruct", file]);
    assert_eq!(recon.status.code(), Some(1));

    // A huge tolerance from the environment flips the verdict.
    let loose = povm_cmd()
        .env("POVM_TOL", "1.0")
        .args(["commutes", file])
        .output()
        .unwrap();
    assert_eq!(loose.status.code(), Some(0));
    assert!(stdout_of(&loose).contains("commutative: true"));

    // The flag out-ranks the environment.
    let flag_wins = povm_cmd()
        .env("POVM_TOL", "1.0")
        .args(["--tol", "1e-9", "commutes", file])
        .output()
        .unwrap();
    assert_eq!(flag_wins.status.code(), Some(1));
}

#[test]
fn invalid_tolerance_values_exit_two() {
    let file = data_file("diagonal_triple.json");
    let bad_env = povm_cmd()
        .env("POVM_TOL", "abc")
        .args(["commutes", file.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
    assert!(stderr_of(&bad_env).contains("POVM_TOL"));

    let bad_flag = run(&["--tol", "-3", "commutes", file.to_str().unwrap()]);
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn demo_reconstruction_prints_pinned_table() {
    let out = run(&["demo", "example4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for line in [
        "N=2",
        "labels: {1, 2}",
        "row 1: 0.5 0.2 0.3",
        "row 2: 0.25 0.25 0.5",
        "G_f(identity) = (1.8, 2.25)",
    ] {
        assert!(text.contains(line), "missing `{line}` in:\n{text}");
    }
}

#[test]
fn demo_verdicts_print_pinned_lines() {
    let out = run(&["demo", "grabowski"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for line in [
        "def11: FEASIBLE",
        "def12: INFEASIBLE (least-squares residual 7.071e-1)",
        "def13: FEASIBLE",
    ] {
        assert!(text.contains(line), "missing `{line}` in:\n{text}");
    }
}

#[test]
fn unsharp_combination_infeasible_exits_one_with_residual() {
    let out = run(&[
        "unsharp",
        "--def",
        "12",
        "--sharp",
        data_file("spin_one_z.json").to_str().unwrap(),
        data_file("diagonal_triple.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out)
        .contains("def12: INFEASIBLE (least-squares residual 7.071e-1)"));
}

#[test]
fn equivalence_prints_induced_values() {
    let out = run(&[
        "equiv",
        data_file("misregistered_spin_half.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("f = (0.5, -0.5)"), "{text}");
    assert!(text.contains("G_f = (0.4, -0.3)"), "{text}");
}

#[test]
fn dilate_prints_dimensions() {
    let out = run(&[
        "dilate",
        data_file("misregistered_spin_half.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("system dimension: 2"));
    assert!(text.contains("extended dimension: 4"));
}

#[test]
fn json_mode_emits_sorted_parseable_object() {
    let out = run(&[
        "--json",
        "reconstruct",
        data_file("diagonal_triple.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(value["num_values"], serde_json::json!(2));
    assert_eq!(value["labels"], serde_json::json!([1.0, 2.0]));
}

#[test]
fn early_closed_pipe_is_not_an_error() {
    use std::io::{BufRead, BufReader, Read};
    use std::process::Stdio;
    let mut child = povm_cmd()
        .args([
            "reconstruct",
            data_file("diagonal_triple.json").to_str().unwrap(),
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let stdout = child.stdout.take().unwrap();
        let mut first = String::new();
        BufReader::new(stdout).read_line(&mut first).unwrap();
        assert_eq!(first.trim(), "N=2");
        // Dropping the handle closes the pipe with output unread.
    }
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
    let mut err = String::new();
    child
        .stderr
        .take()
        .unwrap()
        .read_to_string(&mut err)
        .unwrap();
    assert!(err.is_empty(), "stderr: {err}");
}

#[test]
fn ancilla_model_certifies_and_scalar_model_does_not() {
    let positive = run(&[
        "ancilla",
        data_file("ancilla_misregistration.json").to_str().unwrap(),
    ]);
    assert_eq!(positive.status.code(), Some(0));
    assert!(stdout_of(&positive).contains("certified: yes"));

    // Balanced misregistration makes every induced effect a multiple
    // of identity: nothing distinguishes the system outcomes, so no
    // certificate can exist.
    let model = povm_core::presets::misregistration_ancilla_model(0.5, 0.5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("balanced.json");
    save_model(&path, &Model::Ancilla(model)).unwrap();
    let negative = run(&["ancilla", path.to_str().unwrap()]);
    assert_eq!(negative.status.code(), Some(1));
    assert!(stdout_of(&negative).contains("certified: no"));
}
