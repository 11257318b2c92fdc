//! End-to-end tests of the binary: contract examples, output formats, and
//! exit codes.

use std::process::{Command, Output};

use serde_json::Value;

fn symbidisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbidisc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(args: &[&str]) -> Value {
    let out = symbidisc(args);
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn distance_constant_objective_is_half_and_not_unique() {
    let v = stdout_json(&["distance", "--x", "0,0", "0,0", "--y", "0,0", "0.5,0"]);
    assert!((v["distance"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["unique"], Value::Bool(false));
}

#[test]
fn distance_real_axis_example_is_nine_elevenths_with_omega_one() {
    let v = stdout_json(&["distance", "--x", "0,0", "0,0", "--y", "0.9,0", "0,0"]);
    assert!((v["distance"].as_f64().unwrap() - 9.0 / 11.0).abs() < 1e-9);
    assert_eq!(v["unique"], Value::Bool(true));
    let m = v["maximizers"][0].as_array().unwrap();
    let (re, im) = (m[0].as_f64().unwrap(), m[1].as_f64().unwrap());
    assert!((re - 1.0).abs() < 1e-6 && im.abs() < 1e-6);
}

#[test]
fn distance_of_a_point_to_itself_is_zero() {
    let v = stdout_json(&[
        "distance", "--x", "0.3,0.1", "0.05,0", "--y", "0.3,0.1", "0.05,0",
    ]);
    assert_eq!(v["distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn distance_csv_has_header_and_one_row() {
    let out = symbidisc(&[
        "distance",
        "--x",
        "0,0",
        "0,0",
        "--y",
        "0.9,0",
        "0,0",
        "--output-format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "distance,omega_star_arg,unique");
    assert_eq!(lines.len(), 2);
    let d: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    assert!((d - 9.0 / 11.0).abs() < 1e-9);
    assert!(!text.contains('\r'), "LF endings only");
}

#[test]
fn scan_royal_grid_distance_column_is_abs_lambda() {
    let out = symbidisc(&[
        "scan",
        "--x",
        "0,0",
        "0,0",
        "--mode",
        "royal",
        "--lambda",
        "0,0:0.8,0:5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s_re,s_im,p_re,p_im,distance,omega_star_arg,unique"
    );
    for (k, line) in lines.enumerate() {
        let cols: Vec<f64> = line
            .split(',')
            .take(6)
            .map(|c| c.parse().unwrap())
            .collect();
        let lambda = 0.2 * k as f64;
        assert!((cols[4] - lambda).abs() < 1e-9, "row {k}: {line}");
    }
}

#[test]
fn scan_single_point_grid_equal_to_base_gives_zero() {
    let out = symbidisc(&[
        "scan",
        "--x",
        "0,0",
        "0,0",
        "--mode",
        "rect",
        "--s",
        "0,0:0,0:1",
        "--p",
        "0,0:0,0:1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let d: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn scan_runs_are_byte_identical() {
    let args = [
        "scan",
        "--x",
        "0.2,0.1",
        "0.05,0",
        "--mode",
        "rect",
        "--s",
        "-0.5,0:0.5,0.2:4",
        "--p",
        "-0.2,0:0.3,0:3",
    ];
    let a = symbidisc(&args);
    let b = symbidisc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scan_empty_grid_exits_with_membership_code() {
    let out = symbidisc(&[
        "scan",
        "--x",
        "0,0",
        "0,0",
        "--mode",
        "rect",
        "--s",
        "3,0:4,0:3",
        "--p",
        "0,0:0,0:1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn automorphism_rotation_maps_s_p_to_ws_w2p() {
    let v = stdout_json(&[
        "automorphism",
        "--rotation",
        "0,1",
        "--point",
        "0.3,0.2",
        "0.05,0.01",
    ]);
    let img = &v["point_image"];
    let s = img["s"].as_array().unwrap();
    let p = img["p"].as_array().unwrap();
    // i*(0.3+0.2i) = -0.2+0.3i, i^2*(0.05+0.01i) = -0.05-0.01i.
    assert!((s[0].as_f64().unwrap() + 0.2).abs() < 1e-15);
    assert!((s[1].as_f64().unwrap() - 0.3).abs() < 1e-15);
    assert!((p[0].as_f64().unwrap() + 0.05).abs() < 1e-15);
    assert!((p[1].as_f64().unwrap() + 0.01).abs() < 1e-15);
}

#[test]
fn automorphism_keeps_royal_points_royal() {
    let v = stdout_json(&[
        "automorphism",
        "--rotation",
        "0.6,0.8",
        "--center",
        "0.3,-0.1",
        "--point",
        "1.0,0",
        "0.25,0",
    ]);
    assert!(v["point_image"]["royal_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn automorphism_maps_flat_geodesics_consistently() {
    let v = stdout_json(&[
        "automorphism",
        "--rotation",
        "0.6,0.8",
        "--center",
        "0.3,-0.1",
        "--beta",
        "0.4,0.2",
    ]);
    let img = &v["geodesic_image"];
    assert!(img["consistency_residual"].as_f64().unwrap() < 1e-10);
    let beta = img["beta"].as_array().unwrap();
    let norm = beta[0].as_f64().unwrap().hypot(beta[1].as_f64().unwrap());
    assert!(norm < 1.0);
}

#[test]
fn geodesic_through_point_round_trips() {
    let v = stdout_json(&["geodesic", "--through", "0.4,0.1", "0.1,0.05"]);
    assert!(v["roundtrip_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["royal_intersection"]["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn hered_h0_on_contraction_is_psd() {
    let v = stdout_json(&[
        "hered",
        "--h",
        &fixture("h0.json"),
        "--tuple",
        &fixture("contraction.json"),
    ]);
    assert_eq!(v["psd"], Value::Bool(true));
    assert_eq!(v["commutation_residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn hered_h0_squared_on_nilpotent_has_min_eig_minus_062() {
    let v = stdout_json(&[
        "hered",
        "--h",
        &fixture("h0sq.json"),
        "--tuple",
        &fixture("nilpotent09.json"),
    ]);
    assert_eq!(v["psd"], Value::Bool(false));
    assert!((v["min_eig"].as_f64().unwrap() + 0.62).abs() < 1e-12);
}

#[test]
fn hered_noncommuting_tuple_exits_4_with_residual() {
    let out = symbidisc(&[
        "hered",
        "--h",
        &fixture("h0.json"),
        "--tuple",
        &fixture("noncommuting.json"),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("commutation residual"), "stderr: {err}");
}

#[test]
fn hered_bad_schema_exits_2() {
    let out = symbidisc(&[
        "hered",
        "--h",
        &fixture("noncommuting.json"),
        "--tuple",
        &fixture("contraction.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_modes_pass_on_seeded_inputs() {
    let v = stdout_json(&[
        "kernel", "--mode", "szego", "--points", "0.1,0.2", "-0.3,0", "0,0.5", "0.4,-0.2",
    ]);
    assert_eq!(v["psd"], Value::Bool(true));
    assert_eq!(v["rank"].as_u64().unwrap(), 4);

    let v = stdout_json(&[
        "kernel",
        "--mode",
        "extremal",
        "--omega",
        "0.6,0.8",
        "--seed",
        "7",
        "--samples",
        "8",
    ]);
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["rank"].as_u64().unwrap() <= 1);

    let v = stdout_json(&[
        "kernel",
        "--mode",
        "sandwich",
        "--omega",
        "1,0",
        "--rotation",
        "0,1",
        "--center",
        "0.3,0.2",
        "--seed",
        "9",
        "--samples",
        "10",
        "--tolerance",
        "1e-12",
    ]);
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn parse_and_membership_exit_codes() {
    assert_eq!(
        symbidisc(&["distance", "--x", "0,0", "bogus", "--y", "0,0", "0,0"])
            .status
            .code(),
        Some(2)
    );
    let out = symbidisc(&["distance", "--x", "3,0", "0,0", "--y", "0,0", "0,0"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("root modulus"), "stderr: {err}");
}

#[test]
fn selftest_quick_passes_and_perturbation_fails_royal_collapse() {
    let ok = symbidisc(&["selftest", "--seed", "42", "--level", "quick"]);
    assert!(ok.status.success());
    let text = String::from_utf8(ok.stdout).unwrap();
    assert!(text.contains("result: PASS"));

    let bad = symbidisc(&[
        "selftest",
        "--seed",
        "42",
        "--level",
        "quick",
        "--perturb-phi-sign",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.contains("symm/royal-collapse"));
    assert!(text.contains("FAIL"));
}
