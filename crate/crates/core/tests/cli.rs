use std::process::Command;

use qflow::cli::{run, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn qflow(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("qflow").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn check_teleport() {
    let (code, out, _) = qflow(&["check", &fixture("teleport.qd")]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["valid"], true);
    assert_eq!(v["components"][0]["class"], "processor");
}

#[test]
fn verify_sevenwire_passes() {
    let (code, out, _) = qflow(&["verify", &fixture("sevenwire.qd"), "--trials", "50", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["entries"].as_array().unwrap().iter().all(|e| e["pass"] == true));
}

#[test]
fn demo_teleport_rows() {
    let (code, out, _) = qflow(&["demo-teleport", "--dim", "2", "--seed", "3"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    let rows = v["report"]["outcomes"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!((r["probability"].as_f64().unwrap() - 0.25).abs() < 1e-9);
        assert!((r["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["verify", "sevenwire.qd", "--trials", "8", "--seed", "5", "--inject-random-v"],
        vec!["demo-teleport", "--dim", "3", "--seed", "9"],
        vec!["canon", "sevenwire.qd", "--inject-random-v", "--seed", "2"],
        vec!["prop", "productchain.qd", "--input-dsl", "rand 4", "--dump-maps"],
    ] {
        let args: Vec<String> =
            args.iter().map(|a| if a.ends_with(".qd") { fixture(a) } else { a.to_string() }).collect();
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = qflow(&refs);
        assert_eq!(first.0, EXIT_OK, "{args:?}: {}", first.2);
        assert_eq!(first, qflow(&refs));
    }
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(qflow(&[]).0, EXIT_USAGE);
    assert_eq!(qflow(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(qflow(&["check", "/nonexistent.qd"]).0, EXIT_USAGE);
    assert_eq!(qflow(&["verify", &fixture("teleport.qd"), "--trials", "0"]).0, EXIT_USAGE);
    assert_eq!(qflow(&["verify", &fixture("teleport.qd"), "--tolerance", "-1"]).0, EXIT_USAGE);
    assert_eq!(qflow(&["simulate", &fixture("teleport.qd"), "--input-dsl", "ket 99"]).0, EXIT_USAGE);
    let dir = std::env::temp_dir().join(format!("qflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.qd");
    std::fs::write(&bad, "wires a:2\nQ t=1 on (a,z) omega=bell lambda=bell\n").unwrap();
    let (code, _, err) = qflow(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn numeric_failure_exits_1() {
    let (code, out, _) = qflow(&["verify", &fixture("sevenwire.qd"), "--trials", "2", "--tolerance", "1e-300"]);
    assert_eq!(code, EXIT_NUMERIC);
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn flow_reports_visit_order() {
    let (code, out, _) = qflow(&["flow", &fixture("fourbox.qd"), "--start-wire", "w1", "--dump-maps"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    let p = &v["paths"][0];
    assert_eq!(p["boxes"], serde_json::json!(["P3", "P2", "P4", "P1"]));
    assert_eq!(p["end_wire"], "w5");
    assert_eq!(p["map"]["antilinear"], false);
}

#[test]
fn simulate_and_prop_agree() {
    let (_, a, _) = qflow(&["simulate", &fixture("gated.qd"), "--input-dsl", "rand 3"]);
    let (code, b, _) = qflow(&["prop", &fixture("gated.qd"), "--input-dsl", "rand 3"]);
    assert_eq!(code, EXIT_OK);
    let (a, b) = (json(&a), json(&b));
    assert!(b["rel_err_vs_direct"].as_f64().unwrap() < 1e-12);
    assert_eq!(a["output"]["wires"], b["output"]["wires"]);
}

#[test]
fn input_file_is_read() {
    let dir = std::env::temp_dir().join(format!("qflow-input-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("phi.json");
    std::fs::write(
        &path,
        r#"{"wires":[{"id":1,"dim":2}],"polarity":"ket","amps":[[0.6,0.0],[0.0,0.8]]}"#,
    )
    .unwrap();
    let (code, out, err) = qflow(&["flow", &fixture("teleport.qd"), "--input", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    assert_eq!(v["paths"][0]["output"]["amps"], serde_json::json!([[0.6, 0.0], [0.0, 0.8]]));
}

#[test]
fn render_styles() {
    let (code, dot, _) = qflow(&["render", &fixture("teleport.qd")]);
    assert_eq!(code, EXIT_OK);
    assert!(dot.starts_with("digraph"));
    let (_, ascii, _) = qflow(&["render", &fixture("teleport.qd"), "--style", "ascii"]);
    assert!(ascii.contains("Q-----Q"));
}

#[test]
fn canon_emits_form_and_dsl() {
    let (code, out, _) = qflow(&["canon", &fixture("teleport.qd")]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    let form = &v["forms"][0];
    assert_eq!(form["class"], "processor");
    assert!(qflow::diagram::parse(form["dsl"].as_str().unwrap()).is_ok());
    let (_, gated, _) = qflow(&["canon", &fixture("gated.qd")]);
    assert!(json(&gated)["forms"][0]["error"].as_str().unwrap().contains("unitary"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qflow");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&["check", &fixture("teleport.qd")]), 0);
    assert_eq!(status(&["check"]), 2);
    assert_eq!(status(&["verify", &fixture("teleport.qd"), "--trials", "1", "--tolerance", "1e-300"]), 1);
}
