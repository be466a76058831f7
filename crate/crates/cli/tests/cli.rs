use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_local-pir"))
        .args(args)
        .env_remove("LOCAL_PIR_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write_graph(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bounds_golden_values() {
    let p5 = json(&["bounds", "--family", "path", "--n", "5", "--format", "json"]);
    assert_eq!(p5["lower"]["value"], "2/3");
    assert_eq!(p5["upper"]["value"], "2/3");
    assert_eq!(p5["exact"], true);

    let c4 = json(&["bounds", "--family", "cycle", "--n", "4", "--format", "json"]);
    assert_eq!(c4["lower"]["value"], "1/2");
    assert_eq!(c4["exact"], true);
    assert_eq!(c4["pir_comparators"][0]["value"], "2/5");

    let k4 = json(&["bounds", "--family", "complete", "--n", "4", "--format", "json"]);
    assert_eq!(k4["lower"]["value"], "2/5");
    assert_eq!(k4["pir_comparators"][0]["value"]["lower"], 0.35);
    assert_eq!(k4["pir_comparators"][0]["value"]["upper"], 0.3529);

    let text = stdout(&run(&["bounds", "--family", "path", "--n", "6"]));
    assert!(text.contains("lower:   5/9"));
    assert!(text.contains("upper:   5/8"));
    assert!(text.contains("exact:   no"));
}

#[test]
fn bounds_for_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(dir.path(), "p4.json", r#"{"n": 4, "edges": [[1, 2], [2, 3], [3, 4]]}"#);
    let r = json(&["bounds", "--graph", &path, "--format", "json"]);
    assert_eq!(r["lower"]["value"], "3/5");
}

#[test]
fn scheme_tables() {
    let c4 = stdout(&run(&["scheme", "--family", "cycle", "--n", "4", "--t", "2"]));
    assert_eq!(c4.matches("theta = ").count(), 4);
    assert!(c4.contains("theta = 1 | a1+d1    | a2+b1    | b1       | d1\n"));
    let k4 = stdout(&run(&["scheme", "--family", "complete", "--n", "4", "--t", "2"]));
    assert_eq!(k4.matches("theta = ").count(), 6);
    let star = stdout(&run(&["scheme", "--family", "star", "--n", "6"]));
    assert_eq!(star.matches("theta = ").count(), 5);
    assert!(star.contains("theta = 3 |          |          | c1"));

    let one = json(&["scheme", "--family", "cycle", "--n", "4", "--t", "2", "--theta", "2", "--format", "json"]);
    let rows = one["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["theta"], 2);
    assert_eq!(rows[0]["L"], 2);
}

#[test]
fn fixture_scheme_uses_its_own_graph() {
    let k4 = stdout(&run(&["scheme", "--scheme", "fixture", "--fixture", "k4", "--theta", "2"]));
    assert!(k4.contains("theta = 2 | a1+b1    | a1       | b3+d1    | c2"));
    let o = run(&["scheme", "--family", "cycle", "--n", "5", "--scheme", "fixture"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--family", "cycle", "--n", "4", "--t", "2", "--q", "2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("rate 1/2"));

    let k4 = json(&["verify", "--family", "complete", "--n", "4", "--t", "2", "--format", "json", "--seeds", "8"]);
    assert_eq!(k4["verdict"], "PASS");
    assert_eq!(k4["cost"]["rate"], "2/5");
    assert_eq!(k4["privacy"][0]["thetas"], serde_json::json!([1, 2, 3]));
    assert_eq!(k4["privacy"][0]["counterexample"], Value::Null);

    let leaky = run(&[
        "verify", "--family", "cycle", "--n", "5", "--t-i", "1", "--t-j", "2", "--lower-index-roles",
    ]);
    assert_eq!(leaky.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_graph(dir.path(), "bad.json", r#"{"n": 3, "edges": [[1, 1]]}"#);
    assert_eq!(run(&["verify", "--graph", &bad]).status.code(), Some(2));
    let garbled = write_graph(dir.path(), "garbled.json", "{\"n\": ");
    assert_eq!(run(&["verify", "--graph", &garbled]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
}

#[test]
fn enumeration_cap_from_flag_and_env() {
    let args = ["verify", "--family", "complete", "--n", "4", "--t", "2", "--seeds", "2"];
    let mut with_flag = args.to_vec();
    with_flag.extend(["--cap", "100"]);
    assert_eq!(run(&with_flag).status.code(), Some(2));

    let env = Command::new(env!("CARGO_BIN_EXE_local-pir"))
        .args(with_flag)
        .env("LOCAL_PIR_CAP", "1000000")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    let env = Command::new(env!("CARGO_BIN_EXE_local-pir"))
        .args(args)
        .env("LOCAL_PIR_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
}

#[test]
fn simulate_examples() {
    let p7 = json(&["simulate", "--family", "path", "--n", "7", "--scheme", "bipartite", "--format", "json"]);
    assert_eq!(p7["rate"], "3/5");
    assert_eq!(p7["lower"], "3/5");
    assert_eq!(p7["upper"], "3/5");
    assert_eq!(p7["within_bounds"], true);

    let dir = tempfile::tempdir().unwrap();
    let two = write_graph(
        dir.path(),
        "two_c4.json",
        r#"{"n": 8, "edges": [[1,2],[2,3],[3,4],[4,1],[5,6],[6,7],[7,8],[8,5]]}"#,
    );
    let r = json(&["simulate", "--graph", &two, "--scheme", "union", "--format", "json"]);
    assert_eq!(r["rate"], "1/2");

    let star = stdout(&run(&["simulate", "--family", "star", "--n", "9", "--scheme", "bipartite"]));
    assert!(star.contains("rate:     1 (1.0000) within [1, 1]"));
}

#[test]
fn transcript_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = run(&[
        "simulate", "--family", "cycle", "--n", "4", "--t", "2", "--seeds", "3", "--q", "5",
        "--dump-transcripts", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let ts: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let ts = ts.as_array().unwrap();
    assert_eq!(ts.len(), 12);
    for t in ts {
        for key in ["theta", "seed", "q", "per_server", "decoded_ok", "D_k"] {
            assert!(t.get(key).is_some(), "{key}");
        }
        assert_eq!(t["decoded_ok"], true);
        assert_eq!(t["D_k"], 4);
        assert_eq!(t["q"], 5);
    }
    assert_eq!(ts[0]["per_server"][0]["server"], 1);
}

#[test]
fn json_is_byte_stable() {
    for args in [
        vec!["bounds", "--family", "complete", "--n", "6", "--format", "json"],
        vec!["verify", "--family", "complete", "--n", "4", "--t", "2", "--seeds", "4", "--format", "json"],
        vec!["simulate", "--family", "path", "--n", "6", "--format", "json"],
        vec!["scheme", "--family", "complete", "--n", "5", "--format", "json"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
