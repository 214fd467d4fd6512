use std::process::{Command, Output};

use serde_json::Value;

fn chordal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chordal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn eval_field_at_a_point() {
    let out = chordal(&["eval", "--field", "0; -i*z2/z1", "--at", "(i, 0.5)"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["value"], serde_json::json!(["0+0i", "-0.5+0i"]));
}

#[test]
fn eval_poisson_and_slice() {
    let out = chordal(&["eval", "--what", "poisson", "--at", "(i, 0)"]);
    assert_eq!(json(&out)["value"], serde_json::json!(-1.0));
    let out = chordal(&[
        "eval",
        "--what",
        "slice",
        "--field",
        "builtin:example2",
        "--gamma",
        "0",
        "--zeta",
        "i",
    ]);
    assert_eq!(json(&out)["slice"], "0+1i");
}

#[test]
fn eval_metric_matrix_and_norm() {
    let out = chordal(&[
        "eval", "--what", "metric", "--at", "(2i, 0)", "--vector", "(1, 0)",
    ]);
    let v = json(&out);
    assert_eq!(v["matrix"][0][0], "0.25+0i");
    assert_eq!(v["norm"], serde_json::json!(0.5));
    let out = chordal(&[
        "--domain", "disc", "eval", "--what", "metric", "--at", "(0)", "--vector", "(1)",
    ]);
    assert_eq!(json(&out)["norm"], serde_json::json!(2.0));
}

#[test]
fn capacity_one_dim_and_slices() {
    let out = chordal(&["capacity", "--field", "-1/z", "--one-dim"]);
    assert_eq!(json(&out)["value"], serde_json::json!(1.0));
    let out = chordal(&["capacity", "--field", "builtin:example1", "--slices", "1,2"]);
    let v = json(&out)["values"].clone();
    assert!((v[0].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!((v[1].as_f64().unwrap() - 8.0).abs() < 1e-6);
    let out = chordal(&["capacity", "--field", "builtin:example2", "--slices", "0,1"]);
    assert_eq!(json(&out)["values"], serde_json::json!([1.0, 1.0]));
    let out = chordal(&[
        "capacity",
        "--measure",
        r#"[{"u": -1, "m": 0.5}, {"u": 2, "m": 1.5}]"#,
        "--one-dim",
    ]);
    assert!((json(&out)["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn flow_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = chordal(&[
        "flow",
        "--field",
        "builtin:example1",
        "--z0",
        "(i, 0.5)",
        "--t",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["endpoint"][0], "0+1i");
    let z2 = v["endpoint"][1].as_str().unwrap();
    assert!(z2.starts_with("0.18393972"), "{z2}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,re(z1),im(z1),re(z2),im(z2),u\n"));
    assert_eq!(
        text.lines().count(),
        v["samples"].as_u64().unwrap() as usize + 1
    );
}

#[test]
fn zero_field_flow_stays_put() {
    let out = chordal(&[
        "flow",
        "--field",
        "builtin:zero",
        "--z0",
        "(i, 0.5)",
        "--t",
        "3",
    ]);
    assert_eq!(
        json(&out)["endpoint"],
        serde_json::json!(["0+1i", "0.5+0i"])
    );
}

#[test]
fn flow_with_a_piecewise_driver() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pieces.json");
    std::fs::write(
        &path,
        r#"[{"t0":0,"t1":1,"field":"-1/z"},{"t0":1,"t1":2,"field":"-2/z"}]"#,
    )
    .unwrap();
    let out = chordal(&[
        "flow",
        "--driver",
        path.to_str().unwrap(),
        "--z0",
        "i",
        "--t",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    let s = json(&out)["endpoint"][0].as_str().unwrap().to_string();
    assert!(s.starts_with("0+2.6457513110"), "{s}");
    let out = chordal(&[
        "flow",
        "--driver",
        path.to_str().unwrap(),
        "--z0",
        "i",
        "--t",
        "3",
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn member_verdicts_set_the_exit_code() {
    let out = chordal(&["member", "--field", "builtin:example2", "--c", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "consistent");
    let out = chordal(&["member", "--field", "builtin:example1", "--c", "100"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["witness"].as_array().unwrap().len(), 2);
    let out = chordal(&["member", "--field", "-1/z", "--c", "1"]);
    assert_eq!(json(&out)["grid"], "hp-v1");
    assert_eq!(code(&out), 0);
}

#[test]
fn iterate_flow_map_diverges() {
    let out = chordal(&[
        "iterate",
        "--map",
        "flow1:builtin:example2",
        "--z0",
        "(i,0.5)",
        "--n",
        "50",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["diagnostic"], "diverges_to_infinity");
}

#[test]
fn slice_vs_global_reports_evidence() {
    let out = chordal(&[
        "slice-vs-global",
        "--field",
        "builtin:example2",
        "--gammas",
        "0, 1, 1+i",
        "--grid",
        "siegel-coarse-v1",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["max_slice_capacity"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["global_at_max_slice_capacity"]["verdict"].is_string());
}

#[test]
fn verify_metric_suite() {
    let out = chordal(&["verify", "--suite", "metric", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let groups = v["groups"].as_array().unwrap();
    assert!(groups.len() >= 4);
    assert!(groups.iter().all(|g| g["samples"].as_u64().unwrap() > 0));
}

#[test]
fn jobs_flag_does_not_change_output() {
    let a = chordal(&[
        "--jobs",
        "1",
        "member",
        "--field",
        "builtin:example2",
        "--c",
        "2",
        "--grid",
        "siegel-coarse-v1",
    ]);
    let b = chordal(&[
        "--jobs",
        "4",
        "member",
        "--field",
        "builtin:example2",
        "--c",
        "2",
        "--grid",
        "siegel-coarse-v1",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_and_numerical_errors_have_distinct_codes() {
    assert_eq!(
        code(&chordal(&["eval", "--field", "z1 +", "--at", "(i, 0)"])),
        2
    );
    assert_eq!(
        code(&chordal(&["eval", "--field", "1/z", "--at", "(-i)"])),
        2
    );
    assert_eq!(code(&chordal(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&chordal(&["frobnicate"])), 2);
    let out = chordal(&["eval", "--field", "1/(z - i)", "--at", "(i)"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let out = chordal(&["flow", "--field", "-i", "--z0", "(0.5i)", "--t", "1"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let out = chordal(&[
        "eval", "--tau", "0", "--p", "z", "--at", "(0.5)", "--domain", "disc",
    ]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn help_documents_grids_and_exit_codes() {
    let out = chordal(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("hp-v1") && text.contains("siegel-v1") && text.contains("siegel-coarse-v1")
    );
    assert!(text.contains("Exit codes"));
}
