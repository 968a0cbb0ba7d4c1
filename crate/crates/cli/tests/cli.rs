use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn cmtk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmtk"))
        .args(args)
        .output()
        .expect("cmtk runs")
}

fn on_m0(cmd: &[&str]) -> Output {
    let (sig, st) = (data("m0.cms"), data("m0.json"));
    let mut args: Vec<&str> = cmd.to_vec();
    args.extend(["--sig", &sig, "--structure", &st]);
    cmtk(&args)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn eval_inf_r_is_zero() {
    let out = on_m0(&["eval", "--formula", "inf x:S. R(x)"]);
    let r = report(&out);
    assert_eq!(code(&out), 0);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["value"], "0");
}

#[test]
fn eval_sup_r_fails() {
    let out = on_m0(&["eval", "--formula", "sup x:S. R(x)"]);
    let r = report(&out);
    assert_eq!(code(&out), 1);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["value"], "1");
}

#[test]
fn eval_constant_zero() {
    let out = on_m0(&["eval", "--formula", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["value"], "0");
}

#[test]
fn eval_with_assignment_and_tolerance() {
    let out = on_m0(&["eval", "--formula", "R(x)", "--assign", "x=b"]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["value"], "1/4");
    let out = on_m0(&["eval", "--formula", "R(x)", "--assign", "x=b", "--tol", "1/4"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn decimal_marks_approximate() {
    let out = cmtk(&[
        "--decimal",
        "3",
        "eval",
        "--sig",
        &data("m0.cms"),
        "--structure",
        &data("m0.json"),
        "--formula",
        "R(x)",
        "--assign",
        "x=b",
        "--tol",
        "1",
    ]);
    let r = report(&out);
    assert_eq!(r["status"], "approximate");
    assert_eq!(r["value"], "0.250");
    assert_eq!(code(&out), 1);
}

#[test]
fn metric_check_passes() {
    let out = on_m0(&["check", "--what", "metric"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["status"], "pass");
}

#[test]
fn r_is_not_definable() {
    let out = on_m0(&["check", "--what", "definable", "--formula", "R"]);
    let r = report(&out);
    assert_eq!(code(&out), 1);
    assert_eq!(r["status"], "fail");
    let ws = r["witnesses"].as_array().unwrap();
    assert!(ws
        .iter()
        .any(|w| w["check"] == "condition2" && w["at"] == serde_json::json!(["c"])));
}

#[test]
fn distance_to_constant_is_definable() {
    let out = on_m0(&["check", "--what", "definable", "--formula", "d(x, e)", "--context", "x : S"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn a7_with_equal_formulas() {
    let out = on_m0(&["check", "--what", "a7", "--var", "x : S", "--psi", "R(x)", "--phi", "R(x)"]);
    let r = report(&out);
    assert_eq!(code(&out), 0);
    assert_eq!(r["value"], "0");
}

#[test]
fn adjunction_on_m0() {
    let out = on_m0(&[
        "check",
        "--what",
        "adjunction",
        "--context",
        "x : S, y : S",
        "--formula",
        "d(x, y)",
        "--formula",
        "R(x)",
        "--target",
        "x : S",
        "--target-formula",
        "R(x)",
        "--limit",
        "20",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn declared_modulus_and_staircase() {
    let out = on_m0(&["check", "--what", "modulus", "--formula", "R"]);
    let r = report(&out);
    assert_eq!(code(&out), 0);
    assert!(r["values"]["modulus"]["m0"].is_array());
}

#[test]
fn category_fragment_laws() {
    let cat = data("m0_cat.json");
    let out = on_m0(&["check", "--what", "category", "--category", &cat]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn eq_product_has_nine_elements() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("p.eq");
    std::fs::write(&spec, "eqsort P = product(S, S) depth 2;\n").unwrap();
    let outdir = dir.path().join("out");
    let out = on_m0(&[
        "eq",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    let r = report(&out);
    assert_eq!(code(&out), 0);
    assert_eq!(r["values"]["sorts"][0]["size"], 9);
    assert!(outdir.join("P.json").exists());
    let listing = std::fs::read_to_string(outdir.join("P.axioms")).unwrap();
    assert!(listing.contains("axiom "));
}

#[test]
fn eq_canparam_of_constant_is_a_point() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("c.eq");
    std::fs::write(&spec, "eqsort C = canparam(d(e, e); x : S; y : S);\n").unwrap();
    let out = on_m0(&["eq", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["values"]["sorts"][0]["size"], 1);
}

#[test]
fn eq_defset_of_r_cites_the_clause() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("d.eq");
    std::fs::write(&spec, "eqsort D = defset(R(x); x : S);\n").unwrap();
    let out = on_m0(&["eq", "--spec", spec.to_str().unwrap()]);
    let r = report(&out);
    assert_eq!(code(&out), 1);
    assert_eq!(r["status"], "fail");
    let e = r["values"]["error"].as_str().unwrap();
    assert!(e.contains("definable sets") && e.contains("condition (2)"), "{e}");
}

#[test]
fn conservative_over_product() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("p.eq");
    std::fs::write(&spec, "eqsort P = product(S, S) depth 2;\n").unwrap();
    let out = on_m0(&[
        "check",
        "--what",
        "conservative",
        "--spec",
        spec.to_str().unwrap(),
        "--sentence",
        "sup x:S. R(x)",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn defcat_internal_language() {
    let out = on_m0(&["defcat", "--internal"]);
    let r = report(&out);
    assert_eq!(code(&out), 0);
    let sig = r["values"]["internal_signature"].as_str().unwrap();
    assert!(sig.contains("sort S_S;"));
    assert!(sig.contains("fn f_f : S_S -> S_S;"));
    let cat = data("m0_cat.json");
    let out = on_m0(&["defcat", "--category", &cat, "--internal"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn parse_roundtrip() {
    let out = cmtk(&[
        "parse",
        "--sig",
        &data("m0.cms"),
        "--formula",
        "sup x:S. max(R(x), d(x, e))",
        "--roundtrip",
    ]);
    assert_eq!(code(&out), 0);
    let out = cmtk(&["parse", "--theory", &data("m0.cms"), "--roundtrip"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn input_errors_exit_two() {
    let out = on_m0(&["eval", "--formula", "sup x:S. ("]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["status"], "error");
    let out = on_m0(&["eval", "--formula", "R(e, e)"]);
    assert_eq!(code(&out), 2);
    let out = cmtk(&["eval", "--sig", "/nonexistent.cms", "--structure", &data("m0.json"), "--formula", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reports_are_deterministic() {
    let cat = data("m0_cat.json");
    let a = on_m0(&["defcat", "--category", &cat, "--internal"]);
    let b = on_m0(&["defcat", "--category", &cat, "--internal"]);
    assert_eq!(a.stdout, b.stdout);
    let a = on_m0(&["check", "--what", "definable", "--formula", "R"]);
    let b = on_m0(&["check", "--what", "definable", "--formula", "R"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn stable_embedding() {
    let sub = data("m0_sub.cms");
    let args = |phi: &'static str| {
        vec![
            "check", "--what", "stable-embedded", "--sub", &sub, "--x", "x : S", "--y", "y : S", "--z", "z : S",
            "--psi", "d(x, z)", "--phi", phi,
        ]
    };
    assert_eq!(code(&on_m0(&args("d(x, y)"))), 0);
    let out = on_m0(&args("max(R(y), d(x, y))"));
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert!(r["witnesses"].as_array().unwrap().iter().any(|w| w["at"] == serde_json::json!(["c"])));
}
