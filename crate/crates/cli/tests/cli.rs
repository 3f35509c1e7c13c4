use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bifree")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn reduce_and_norm() {
    let o = run(&["reduce", "abBAab"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ab"));
    let o = run(&["norm", "abAB"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("2 <= |abAB| <= 2"));
}

#[test]
fn graph_formats() {
    let g = json(&["graph", "abAB", "bbbb", "aaa", "--format", "json"]);
    assert_eq!(g["vertices"], 7);
    assert_eq!(g["base"], 0);
    let edges = g["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 9);
    for e in edges {
        assert!(e["src"].is_u64() && e["dst"].is_u64() && e["label"].is_string());
    }
    let dot = stdout(&run(&["graph", "abAB", "bbbb", "aaa", "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("doublecircle"));
    assert!(dot.contains("red"));
}

#[test]
fn killer_outputs() {
    let k = json(&["killer", "abAB", "bbbb", "aaa", "--format", "json"]);
    assert_eq!(k["verified"], true);
    let o = run(&["killer", "--rank", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("killer a"));
    let o = run(&["killer", "aa", "b", "abA"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_verdicts() {
    let cases = [
        (vec!["--source-rank", "2", "--target-rank", "2", "--image", "ab", "--image", "b"], "isomorphism"),
        (vec!["--source-rank", "2", "--target-rank", "2", "--image", "a", "--image", "a"], "non_injective"),
        (vec!["--source-rank", "3", "--target-rank", "2", "--image", "aa", "--image", "b", "--image", "abA"], "finite_index_proper"),
        (vec!["--source-rank", "3", "--target-rank", "2", "--image", "abAB", "--image", "bbbb", "--image", "aaa"], "infinite_index"),
    ];
    for (args, kind) in cases {
        let mut full = vec!["analyze"];
        full.extend(args);
        full.extend(["--format", "json"]);
        let v = json(&full);
        assert_eq!(v["verdict"]["kind"], kind, "{v}");
    }
}

#[test]
fn analyze_growth_csv() {
    let o = run(&[
        "analyze", "--source-rank", "3", "--target-rank", "2", "--image", "aa", "--image", "b", "--image", "abA", "--growth",
        "4", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "k");
    assert!(headers.iter().any(|h| h == "image_upper"));
    assert_eq!(reader.records().count(), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["norm", "ab?"]).status.code(), Some(3));
    assert_eq!(run(&["bogus"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let o = run(&[
        "analyze", "--source-rank", "2", "--target-rank", "2", "--image", "aa", "--image", "bb", "--budget", "10",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn experiments_run() {
    for id in ["dihedral-diameter", "example-A2", "normal-growth", "distortion-growth", "qsur-growth"] {
        let v = json(&["experiment", id, "--format", "json"]);
        assert_eq!(v["id"], id);
        assert_eq!(v["passed"], true, "{id}");
    }
    assert_eq!(run(&["experiment", "nope"]).status.code(), Some(3));
}

#[test]
fn out_file() {
    let path = std::env::temp_dir().join(format!("bifree-cli-test-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    assert_eq!(run(&["--out", p, "graph", "ab", "--format", "json"]).status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["vertices"], 2);
    std::fs::remove_file(path).unwrap();
}
