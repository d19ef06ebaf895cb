use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

use algebroid_loc_cli::Report;

fn algloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("algloc-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run_with_report(args: &[&str], name: &str) -> (i32, Report, String) {
    let path = scratch_path(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--report", &p]);
    let out = algloc(&full);
    let text = std::fs::read_to_string(&path).expect("report written");
    let report: Report = serde_json::from_str(&text).expect("report parses");
    (out.status.code().unwrap(), report, text)
}

#[test]
fn list_examples_names_every_builtin() {
    let (code, report, _) = run_with_report(&["list-examples"], "list.json");
    assert_eq!(code, 0);
    let names: Vec<&str> = report.examples.iter().map(|e| e.name.as_str()).collect();
    for expected in [
        "s2-tangent-rotation",
        "t2-tangent-translation",
        "s2-poisson",
        "s2-atiyah-line",
        "s2xs2-tangent",
        "su2-point",
    ] {
        assert!(
            names.contains(&expected),
            "{expected} missing from {names:?}"
        );
    }
}

#[test]
fn localize_sphere_gives_total_area() {
    let (code, report, _) = run_with_report(
        &["localize", "s2-tangent-rotation", "--xi", "1.0"],
        "loc.json",
    );
    assert_eq!(code, 0);
    let loc = report.localization.expect("localization section");
    assert!(report.pass && loc.pass);
    // the volume form sin(θ) dθ∧dφ integrates to the area of the unit sphere
    assert!((loc.lhs - 4.0 * PI).abs() < 1e-10, "lhs = {}", loc.lhs);
    assert!((loc.rhs - 4.0 * PI).abs() < 1e-9, "rhs = {}", loc.rhs);
    assert_eq!(loc.contributions.len(), 2);
}

#[test]
fn negative_xi_values_parse() {
    let (code, report, _) = run_with_report(
        &["localize", "s2-tangent-rotation", "--xi", "-2.5"],
        "neg.json",
    );
    assert_eq!(code, 0);
    assert!(report.localization.unwrap().pass);
}

#[test]
fn bott_on_product_of_spheres() {
    let (code, report, _) = run_with_report(
        &["bott", "s2xs2-tangent", "--phi", "x1", "--xi", "1.0,2.0"],
        "bott.json",
    );
    assert_eq!(code, 0);
    let b = report.bott.expect("bott section");
    assert_eq!(b.contributions.len(), 4);
    assert_eq!(b.weight, 4);
    // each factor contributes a class whose square vanishes on the surface,
    // so the first Pontryagin number of S²×S² is zero
    assert!(b.phi_number.abs() < 1e-9);
    assert!(b.rhs.abs() < 1e-9);
}

#[test]
fn reports_are_reproducible_apart_from_timings() {
    let args = [
        "complex-checks",
        "s2-tangent-rotation",
        "--seed",
        "3",
        "--cochains",
        "5",
    ];
    let (_, a, _) = run_with_report(&args, "det-a.json");
    let (_, b, _) = run_with_report(&args, "det-b.json");
    let sa = serde_json::to_string(&a.without_timings()).unwrap();
    let sb = serde_json::to_string(&b.without_timings()).unwrap();
    assert_eq!(sa, sb);
    assert!(!a.timings_ms.is_empty());
}

#[test]
fn report_round_trips() {
    let (_, report, text) = run_with_report(&["localize", "s2-atiyah-line"], "rt.json");
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
    let back: Report = serde_json::from_str(&again).unwrap();
    assert_eq!(back, report);
}

#[test]
fn different_inputs_change_the_digest() {
    let (_, a, _) = run_with_report(
        &["localize", "s2-tangent-rotation", "--xi", "1"],
        "dig-a.json",
    );
    let (_, b, _) = run_with_report(
        &["localize", "s2-tangent-rotation", "--xi", "2"],
        "dig-b.json",
    );
    assert_ne!(a.inputs_digest, b.inputs_digest);
    assert_eq!(a.conventions_hash, b.conventions_hash);
}

#[test]
fn failed_check_exits_with_one() {
    // four nodes per axis cannot resolve the integral to this tolerance
    let out = algloc(&[
        "localize",
        "s2-tangent-rotation",
        "--quad-order",
        "4",
        "--tol-rel",
        "1e-14",
        "--tol-abs",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("result: FAIL"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = algloc(&["localize", "s2-tangent-rotation", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_example_is_a_usage_error() {
    let out = algloc(&["check-axioms", "no-such-example"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wrong_number_of_xi_values_is_a_usage_error() {
    let out = algloc(&["localize", "s2-tangent-rotation", "--xi", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_expression_reports_its_location() {
    let src = algebroid_loc::spec::builtin_source("s2-tangent-rotation").unwrap();
    let broken = src.replacen("sin(th)", "sin(th +* 2)", 1);
    let path = scratch_path("broken.toml");
    std::fs::write(&path, broken).unwrap();
    let out = algloc(&["check-axioms", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line ") && err.contains("column "), "{err}");
}

#[test]
fn example_files_load_from_disk() {
    let src = algebroid_loc::spec::builtin_source("s2-poisson").unwrap();
    let path = scratch_path("poisson.toml");
    std::fs::write(&path, src).unwrap();
    let out = algloc(&["check-axioms", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}
