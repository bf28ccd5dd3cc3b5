//! End-to-end runs of the `cylspace` binary on the fixture files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylspace")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let o = run(&all);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (o.status.code().unwrap(), v)
}

fn statuses(v: &serde_json::Value) -> Vec<(String, String)> {
    v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["law"].as_str().unwrap().to_string(), r["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn eval_lists_satisfying_assignments() {
    let o = run(&["eval", &fixture("g1.struct"), "-n", "2", "E(v0,v1)"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("(0,1)\n(1,1)\n"), "{out}");
    assert!(out.contains("satisfying: 2"));
}

#[test]
fn check_space_passes_on_a_topologization() {
    let (code, v) = json(&["check-space", &fixture("g1.struct"), "-n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["command"], "check-space");
    assert_eq!(v["counters"]["points"], 8);
    assert!(statuses(&v).iter().all(|(_, s)| s != "fail"));
    assert!(v["timings_ms"].as_object().unwrap().is_empty());
}

#[test]
fn json_output_is_deterministic_and_parallel_invariant() {
    let file = fixture("g1.struct");
    let a = run(&["check-space", &file, "-n", "3", "--json", "--seed", "5"]);
    let b = run(&["check-space", &file, "-n", "3", "--json", "--seed", "5"]);
    let c = run(&["check-space", &file, "-n", "3", "--json", "--seed", "5", "--parallel"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn substitution_and_permutation() {
    let out = stdout(&run(&["subst", &fixture("g1.struct"), "-n", "3", "E(v0,v1)", "1", "0"]));
    assert!(out.contains("u(1/0) = {(0,1,0),(0,1,1),(1,1,0),(1,1,1)}"), "{out}");
    let out = stdout(&run(&["perm", &fixture("g1.struct"), "-n", "3", "1,2,0", "--point", "(0,1,1)"]));
    assert!(out.contains("ρ{(0,1,1)} = (1,0,1)"), "{out}");
    let out = stdout(&run(&["perm", &fixture("pure2.struct"), "-n", "2", "1,0", "--set", "{1}"]));
    assert!(out.contains("ρu = {(1,0)}"), "{out}");
}

#[test]
fn render_round_trips_through_check_space() {
    let o = run(&["render", &fixture("pure2.struct"), "-n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text, std::fs::read_to_string(fixture("pure2.space")).unwrap());
    let (code, v) = json(&["check-space", &fixture("pure2.space")]);
    assert_eq!(code, 0);
    assert_eq!(v["counters"]["points"], 4);
}

#[test]
fn expansion_of_the_pure_set() {
    let (code, v) = json(&["expand", &fixture("pure2.struct"), "-n", "2", "--alpha", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["counters"]["atoms"], 4);
    let s = statuses(&v);
    assert!(s.contains(&("atom joint consistency".into(), "pass".into())));
    assert!(s.contains(&("expansion map is a basis-preserving C-surjection".into(), "skipped".into())));
}

#[test]
fn expansion_of_a_rigid_base_is_homeomorphic() {
    let (code, v) = json(&["expand", &fixture("g1.struct"), "-n", "2", "--alpha", "2"]);
    assert_eq!(code, 0);
    let s = statuses(&v);
    assert!(s.contains(&("base injection is a homeomorphism".into(), "pass".into())));
}

#[test]
fn expansion_of_an_explicit_base_reports_the_missing_clause() {
    // Clauses 1-4 alone admit non-atoms at finite β; the diagonal axioms fail.
    let (code, v) = json(&["expand", &fixture("pure2.space"), "--alpha", "3"]);
    assert_eq!(code, 1);
    let s = statuses(&v);
    assert!(s.contains(&("atom joint consistency".into(), "skipped".into())));
    assert!(s.contains(&("diagonal-transitive".into(), "fail".into())));
}

#[test]
fn embedding_verdicts() {
    let (code, v) = json(&["embed", &fixture("g1.struct"), &fixture("g2.struct"), "-n", "3"]);
    assert_eq!(code, 0);
    assert!(stdout_lines(&v).contains(&"topological: true".to_string()));
    let (code, v) = json(&["embed", &fixture("g1.struct"), &fixture("e0.struct"), "-n", "3"]);
    assert_eq!(code, 0);
    assert!(stdout_lines(&v).contains(&"topological: false".to_string()));
    let (code, v) = json(&["embed", &fixture("g1.struct"), "-n", "3", "--partial", "0:1"]);
    assert_eq!(code, 0);
    assert!(stdout_lines(&v).contains(&"oracle: false".to_string()));
}

fn stdout_lines(v: &serde_json::Value) -> Vec<String> {
    v["output"].as_array().unwrap().iter().map(|l| l.as_str().unwrap().to_string()).collect()
}

#[test]
fn model_space_of_a_catalog() {
    let files = [fixture("g1.struct"), fixture("g2.struct"), fixture("e0.struct")];
    let (code, v) = json(&["modelspace", &files[0], &files[1], &files[2], "-n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["counters"]["catalog_iso_classes"], 2);
    assert_eq!(v["counters"]["big_model_point_classes"], 2);
    assert_eq!(v["counters"]["points"], 6);
}

#[test]
fn type_space_embedding() {
    let (code, v) = json(&["typespace", &fixture("pure2.struct"), "-k", "1", "--params", "0", "-n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["counters"]["types"], 2);
    assert!(statuses(&v).iter().all(|(_, s)| s == "pass"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["eval", &fixture("g1.struct"), "E(v0,v1)"]).status.code(), Some(2));
    assert_eq!(run(&["eval", &fixture("g1.struct"), "-n", "2", "F(v0)"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "/nonexistent.struct", "-n", "2", "v0=v0"]).status.code(), Some(2));
    assert_eq!(run(&["modelspace", &fixture("g1.struct"), &fixture("pure2.struct"), "-n", "2"]).status.code(), Some(2));
    let o = run(&["eval", &fixture("g1.struct"), "-n", "20", "--limit", "64", "v0=v0"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}
