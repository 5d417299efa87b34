//! End-to-end tests of the binary: generation, reports, files and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn punfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_punfold"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("punfold-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gen_cyclic_sphere_has_14_facets() {
    let out = punfold(&["gen", "--kind", "cyclic", "--d", "4", "--n", "7"]);
    let value = stdout_json(&out);
    assert_eq!(value["dim"], 3); // the boundary of a 4-polytope is a 3-sphere
    assert_eq!(value["facets"].as_array().unwrap().len(), 14);
}

#[test]
fn gen_write_read_round_trip_is_bit_exact() {
    let path = tmp("c47.json");
    let out = punfold(&["gen", "--kind", "cyclic", "--d", "4", "--n", "7", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let first = std::fs::read(&path).unwrap();
    assert_eq!(first.last(), Some(&b'\n'));
    // fvector reads it back
    let fv = stdout_json(&punfold(&["fvector", path.to_str().unwrap()]));
    assert_eq!(fv["f_vector"], serde_json::json!([7, 21, 28, 14]));
    // regenerating yields identical bytes
    let again = punfold(&["gen", "--kind", "cyclic", "--d", "4", "--n", "7"]);
    assert_eq!(again.stdout, first);
}

#[test]
fn unfold_starred_triangle_components() {
    let path = tmp("starred.json");
    punfold(&["gen", "--kind", "starred-simplex", "--d", "2", "--out", path.to_str().unwrap()]);
    let value = stdout_json(&punfold(&["unfold", path.to_str().unwrap()]));
    let mut cells: Vec<u64> = value["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["cells"].as_u64().unwrap())
        .collect();
    cells.sort_unstable();
    assert_eq!(cells, vec![3, 6]);
    assert_eq!(value["branching"], serde_json::json!([[0]]));
}

#[test]
fn odd_of_octahedron_is_empty_with_exit_zero() {
    let path = tmp("oct.json");
    punfold(&["gen", "--kind", "cross-polytope", "--d", "2", "--out", path.to_str().unwrap()]);
    let out = punfold(&["odd", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let value = stdout_json(&out);
    assert_eq!(value["odd_faces"], serde_json::json!([]));
}

#[test]
fn shelling_finds_and_verifies() {
    let path = tmp("bs3.json");
    punfold(&["gen", "--kind", "boundary-simplex", "--d", "3", "--out", path.to_str().unwrap()]);
    let found = stdout_json(&punfold(&["shelling", path.to_str().unwrap()]));
    let order: Vec<String> = found["order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap().to_string())
        .collect();
    let verified =
        stdout_json(&punfold(&["shelling", path.to_str().unwrap(), "--order", &order.join(",")]));
    assert_eq!(verified["order"], found["order"]);
}

#[test]
fn domain_errors_exit_one_with_structured_message() {
    let path = tmp("two-triangles.json");
    std::fs::write(&path, "{\"dim\":2,\"facets\":[[0,1,2],[2,3,4]]}\n").unwrap();
    let out = punfold(&["unfold", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).expect("structured error");
    assert!(err["error"].as_str().unwrap().contains("locally strongly connected"));
}

#[test]
fn usage_errors_exit_two() {
    let out = punfold(&["gen", "--kind"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_cover_unbranched_writes_script_and_certificate() {
    let input = tmp("bs2.json");
    punfold(&["gen", "--kind", "boundary-simplex", "--d", "2", "--out", input.to_str().unwrap()]);
    let sphere = tmp("built.json");
    let script = tmp("built-script.json");
    let cert = tmp("built-cert.json");
    let out = punfold(&[
        "build-cover",
        input.to_str().unwrap(),
        "--oracle",
        "{\"kind\":\"trivial\"}",
        "--out",
        sphere.to_str().unwrap(),
        "--script-out",
        script.to_str().unwrap(),
        "--cert-out",
        cert.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let built: Value = serde_json::from_str(&std::fs::read_to_string(&sphere).unwrap()).unwrap();
    assert_eq!(built["dim"], 2);
    let cert: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert!(cert["total_loop_checks"].as_u64().unwrap() > 0);
    let script: Value = serde_json::from_str(&std::fs::read_to_string(&script).unwrap()).unwrap();
    assert!(script["steps"].as_array().is_some());
    // the output is now foldable
    let odd = stdout_json(&punfold(&["odd", sphere.to_str().unwrap()]));
    assert_eq!(odd["odd_faces"], serde_json::json!([]));
}

#[test]
fn check_equiv_accepts_identity() {
    let path = tmp("oct2.json");
    punfold(&["gen", "--kind", "cross-polytope", "--d", "2", "--out", path.to_str().unwrap()]);
    let out = punfold(&["check-equiv", path.to_str().unwrap(), path.to_str().unwrap()]);
    let value = stdout_json(&out);
    assert_eq!(value["passed"], serde_json::json!(true));
}

#[test]
fn unfold_resolve_writes_a_simplicial_complex() {
    let input = tmp("bs2-resolve.json");
    punfold(&["gen", "--kind", "boundary-simplex", "--d", "2", "--out", input.to_str().unwrap()]);
    let resolved = tmp("resolved.json");
    let out = punfold(&["unfold", input.to_str().unwrap(), "--resolve", resolved.to_str().unwrap()]);
    assert!(out.status.success());
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&resolved).unwrap()).unwrap();
    // barycentric resolution of the 12-cell unfolding: 12 · 3! facets
    assert_eq!(value["facets"].as_array().unwrap().len(), 72);
}

#[test]
fn make_odd_with_empty_target_evens_the_sphere() {
    let input = tmp("bs2-makeodd.json");
    punfold(&["gen", "--kind", "boundary-simplex", "--d", "2", "--out", input.to_str().unwrap()]);
    let target = tmp("empty-target.json");
    std::fs::write(&target, "{\"dim\":0,\"facets\":[]}\n").unwrap();
    let refined = tmp("evened.json");
    let out = punfold(&[
        "make-odd",
        input.to_str().unwrap(),
        "--target",
        target.to_str().unwrap(),
        "--complex-out",
        refined.to_str().unwrap(),
    ]);
    let value = stdout_json(&out);
    assert_eq!(value["script"].as_array().unwrap().len(), 2);
    let odd = stdout_json(&punfold(&["odd", refined.to_str().unwrap()]));
    assert_eq!(odd["odd_faces"], serde_json::json!([]));
}

#[test]
fn extend_coloring_over_the_7gon_cone() {
    let sphere = tmp("7gon.json");
    punfold(&["gen", "--kind", "polygon", "--n", "7", "--out", sphere.to_str().unwrap()]);
    // attach the 3-coloring to the subcomplex file
    let mut value: Value =
        serde_json::from_str(&std::fs::read_to_string(&sphere).unwrap()).unwrap();
    value["attrs"] = serde_json::json!({
        "colors": {"0": 0, "1": 1, "2": 0, "3": 1, "4": 0, "5": 1, "6": 2}
    });
    let colored = tmp("7gon-colored.json");
    std::fs::write(&colored, format!("{value}\n")).unwrap();
    let ball = tmp("7gon-ball.json");
    let out = punfold(&[
        "extend-coloring",
        sphere.to_str().unwrap(),
        "--sub",
        colored.to_str().unwrap(),
        "-k",
        "3",
        "--cone",
        "--out",
        ball.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let ball_value: Value =
        serde_json::from_str(&std::fs::read_to_string(&ball).unwrap()).unwrap();
    assert_eq!(ball_value["dim"], 2);
    assert!(ball_value["attrs"]["colors"].is_object());
    assert!(ball_value["facets"].as_array().unwrap().len() <= 28);
}

#[test]
fn report_records_digests_and_outputs() {
    let input = tmp("st-report.json");
    punfold(&["gen", "--kind", "starred-simplex", "--d", "2", "--out", input.to_str().unwrap()]);
    let report = tmp("report.json");
    let out = punfold(&[
        "--report",
        report.to_str().unwrap(),
        "fvector",
        input.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let digest = value["inputs"][input.to_str().unwrap()].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}
