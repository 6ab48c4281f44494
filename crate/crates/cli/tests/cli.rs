use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn msca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msca")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn toy_pipeline() {
    let d = scratch("toy");
    let inst = d.join("inst.json");
    fs::write(
        &inst,
        r#"{"n": 1, "k": 2, "functions": [
            {"type": "explicit_table", "values": ["0", "1"]},
            {"type": "explicit_table", "values": ["0", "2"]}]}"#,
    )
    .unwrap();
    let (sol, rnd, brute) = (d.join("sol.json"), d.join("round.json"), d.join("brute.json"));
    assert!(msca(&["solve", s(&inst), "-o", s(&sol)]).status.success());
    assert_eq!(json(&sol)["objective"], "1");
    assert!(msca(&["round", s(&inst), s(&sol), "-o", s(&rnd)]).status.success());
    assert_eq!(json(&rnd)["value"], "1");
    assert!(msca(&["brute", s(&inst), "-o", s(&brute)]).status.success());
    assert_eq!(json(&brute)["value"], "1");
    assert_eq!(json(&brute)["assignment"], serde_json::json!([0]));
    let o = msca(&["verify", s(&inst), s(&sol), s(&rnd), s(&brute)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<_> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"k2_dual_integrality"));
    assert!(names.contains(&"brute_consistency"));
}

#[test]
fn gen_is_deterministic() {
    let d = scratch("gen");
    for fam in ["coverage", "facility"] {
        let (a, b) = (d.join(format!("{fam}-a.json")), d.join(format!("{fam}-b.json")));
        for p in [&a, &b] {
            let o = msca(&["gen", "--family", fam, "--n", "8", "--k", "3", "--seed", "7", "-o", s(p)]);
            assert!(o.status.success());
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert_eq!(json(&a)["n"], 8);
    }
    let c = d.join("other.json");
    msca(&["gen", "--family", "coverage", "--n", "8", "--k", "3", "--seed", "8", "-o", s(&c)]);
    assert_ne!(fs::read(d.join("coverage-a.json")).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn gap_instance_objective() {
    let d = scratch("gap");
    let (inst, sol) = (d.join("lb.json"), d.join("sol.json"));
    assert!(msca(&["gen", "--family", "lowerbound", "--k", "3", "--p", "2", "-o", s(&inst)]).status.success());
    assert_eq!(json(&inst)["n"], 15);
    assert!(msca(&["solve", s(&inst), "-o", s(&sol)]).status.success());
    assert_eq!(json(&sol)["objective"], "15/2");
}

#[test]
fn capacity_error_exit_code() {
    let o = msca(&["gen", "--family", "lowerbound", "--k", "5", "--p", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr_json(&o);
    assert_eq!(err["error"], "capacity");
    assert!(err["message"].as_str().unwrap().contains("1365"));
}

#[test]
fn brute_budget_exit_code() {
    let d = scratch("budget");
    let inst = d.join("inst.json");
    msca(&["gen", "--family", "coverage", "--n", "10", "--k", "3", "-o", s(&inst)]);
    let o = msca(&["brute", s(&inst), "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("59049"));
}

#[test]
fn usage_errors() {
    let o = msca(&["gen", "--family", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "usage");
    let o = msca(&["solve", "/nonexistent/inst.json"]);
    assert_eq!(o.status.code(), Some(2));
    let d = scratch("usage");
    let bad = d.join("bad.json");
    fs::write(&bad, "{\"n\": 2}").unwrap();
    assert_eq!(msca(&["solve", s(&bad)]).status.code(), Some(2));
}

/// Halves `"p/q"` or `"p"`.
fn halve(w: &str) -> String {
    match w.split_once('/') {
        Some((p, q)) => format!("{p}/{}", 2 * q.parse::<u64>().unwrap()),
        None => format!("{w}/2"),
    }
}

#[test]
fn corrupted_solution_fails_verification() {
    let d = scratch("corrupt");
    let (inst, sol, bad) = (d.join("inst.json"), d.join("sol.json"), d.join("bad.json"));
    msca(&["gen", "--family", "facility", "--n", "6", "--k", "3", "--seed", "3", "-o", s(&inst)]);
    assert!(msca(&["solve", s(&inst), "-o", s(&sol)]).status.success());
    assert!(msca(&["verify", s(&inst), s(&sol)]).status.success());

    let mut doc = json(&sol);
    let entry = &mut doc["support"][0];
    let w = halve(entry["weight"].as_str().unwrap());
    let first = entry["set"][0].as_u64().unwrap();
    entry["weight"] = Value::from(w);
    fs::write(&bad, doc.to_string()).unwrap();

    let o = msca(&["verify", s(&inst), s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    assert_eq!(err["error"], "verification");
    let msgs = err["message"].to_string();
    assert!(msgs.contains("lp_feasibility"), "{msgs}");
    assert!(msgs.contains(&format!("element {first}")), "{msgs}");
}

#[test]
fn experiment_csv_is_stable() {
    let d = scratch("experiment");
    let (a, b) = (d.join("a.csv"), d.join("b.csv"));
    for p in [&a, &b] {
        let o = msca(&["experiment", "--suite", "k2", "--seed", "5", "--trials", "12", "--csv", s(p)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    let mut lines = csv.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut rows = 0;
    for l in lines {
        let f: Vec<_> = l.split(',').collect();
        assert_eq!(f[col("k")], "2");
        assert_eq!(f[col("round_value")], f[col("lp_value")]);
        assert_eq!(f[col("brute_value")], f[col("lp_value")]);
        rows += 1;
    }
    assert_eq!(rows, 12);
}
