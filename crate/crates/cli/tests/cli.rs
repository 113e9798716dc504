use std::path::PathBuf;
use std::process::{Command, Output};

fn prequant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prequant")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prequant-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn verify_builtin_passes() {
    let o = prequant(&["verify", "gr2c4", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("pass coisotropy"));
}

#[test]
fn odd_fixture_fails_evenness() {
    let o = prequant(&["verify", "hirzebruch1", "--suite", "evenness", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suites"][0]["status"], "fail");
    assert_eq!(v["derived"]["parity_witness"], serde_json::json!([1]));
}

#[test]
fn json_report_is_byte_stable() {
    let args = ["verify", "gr2c4xcp2", "--samples", "3", "--seed", "11", "--json"];
    let (a, b) = (prequant(&args), prequant(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_file_matches_stdout() {
    let out = scratch("report.json", "");
    let o = prequant(&["verify", "cp2", "--samples", "2", "--json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), o.stdout);
}

#[test]
fn spec_file_is_loaded() {
    let p = scratch(
        "cp2gr.json",
        r#"{"name": "cp2-gr", "polytope": {"conormals": [[1,0],[0,1],[-1,-1]], "offsets": [[1,2],[1,2],[1,2]]},
            "factors": [{"n": 2, "k": 2}]}"#,
    );
    let o = prequant(&["build", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["total_dim"], 7);
    assert_eq!(v["lambda"], 2);
}

#[test]
fn malformed_spec_exits_two() {
    let p = scratch("bad.json", "{\"name\": \"x\",\n \"polytope\": {\"conormals\": [[1], [-1]]}}");
    let o = prequant(&["check-polytope", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(prequant(&["build", "no-such-spec"]).status.code(), Some(2));
    assert_eq!(prequant(&["verify", "cp2", "--tol-level", "-1"]).status.code(), Some(2));
    assert_eq!(prequant(&["verify", "cp2", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn non_primitive_spec_names_invariant() {
    let p = scratch("np.json", r#"{"name": "x", "polytope": {"conormals": [[2], [-1]], "offsets": [1, 1]}}"#);
    let o = prequant(&["build", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("primitive conormals"));
}

#[test]
fn flow_reports_oracle_deviation() {
    let o = prequant(&["flow", "gr2c4", "--hamiltonian", "linear", "--t", "1", "--step", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["oracle_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["steps"], 1000);

    let o = prequant(&["flow", "cp2", "--hamiltonian", "zero", "--t", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["start"], v["end"]);
}

#[test]
fn report_over_builtins() {
    let o = prequant(&["report", "--json", "--samples", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 6);
    assert_eq!(v["passed"], true);
}
