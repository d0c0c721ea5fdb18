use std::io::Write;
use std::process::{Command, Output, Stdio};

use fntb::fixtures::{STAR, STAR_R2, TRIANGLE};
use serde_json::Value;

fn fntb(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fntb"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn solve_star() {
    let out = fntb(&["solve"], STAR);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["cost_x2"], 6);
    assert_eq!(v["gap_x2"], 0);
    assert!(v["x"].as_array().unwrap().iter().all(|e| e["x_x2"] == 2));
    assert_eq!(v["potential"].as_array().unwrap().len(), 4);
    assert_eq!(v["multiflow"]["value_x2"], 3);
}

#[test]
fn solve_without_scaling_and_trace() {
    let out = fntb(&["solve", "--no-scaling", "--trace"], TRIANGLE);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["cost_x2"], 3);
    let trace = String::from_utf8_lossy(&out.stderr);
    assert!(trace.lines().last().unwrap().contains("certified"), "{trace}");
}

#[test]
fn text_format() {
    let out = fntb(&["--format", "text", "solve"], TRIANGLE);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("cost: 1.5\n"), "{text}");
}

#[test]
fn infeasible_exit_code() {
    let out = fntb(&["feasibility"], STAR_R2);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["feasible"], false);
    assert_eq!(v["violations"].as_array().unwrap().len(), 3);
    assert_eq!(fntb(&["solve"], STAR_R2).status.code(), Some(2));
    assert_eq!(fntb(&["feasibility"], STAR).status.code(), Some(0));
}

#[test]
fn invalid_input_exit_code() {
    assert_eq!(fntb(&["solve"], "ntb 3 1 3\nt 0 1 2\nr 1 1 1\ne 0 0 1 1\n").status.code(), Some(1));
    assert_eq!(fntb(&["solve"], "garbage").status.code(), Some(1));
    assert_eq!(fntb(&["gen", "--n", "8"], "").status.code(), Some(1), "seed is required");
    assert_eq!(fntb(&["solve", "/nonexistent/file.ntb"], "").status.code(), Some(1));
}

#[test]
fn gen_is_reproducible_and_solvable() {
    let a = fntb(&["gen", "--n", "8", "--k", "3", "--seed", "7"], "");
    let b = fntb(&["gen", "--n", "8", "--k", "3", "--seed", "7"], "");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let out = fntb(&["solve"], &text);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["gap_x2"], 0);
}

#[test]
fn verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, text) in [(None, STAR.to_string()), (Some("3"), String::new()), (Some("11"), String::new())] {
        let text = match seed {
            Some(s) => String::from_utf8(fntb(&["gen", "--seed", s, "--a", "2"], "").stdout).unwrap(),
            None => text,
        };
        let inst = dir.path().join("inst.ntb");
        std::fs::write(&inst, &text).unwrap();
        let solved = fntb(&["solve"], &text);
        let sol = dir.path().join("sol.json");
        std::fs::write(&sol, &solved.stdout).unwrap();
        let out = fntb(&["verify", inst.to_str().unwrap(), sol.to_str().unwrap()], "");
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        let v = json(&out);
        assert_eq!(v["pass"], true);
        assert_eq!(v["gap_x2"], 0);
    }

    // Zeroing the capacities breaks the certificate.
    let inst = dir.path().join("star.ntb");
    std::fs::write(&inst, STAR).unwrap();
    let mut doc = json(&fntb(&["solve"], STAR));
    for e in doc["x"].as_array_mut().unwrap() {
        e["x_x2"] = Value::from(0);
    }
    let sol = dir.path().join("bad.json");
    std::fs::write(&sol, doc.to_string()).unwrap();
    let out = fntb(&["verify", inst.to_str().unwrap(), sol.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn maxmultiflow_outputs() {
    let v = json(&fntb(&["maxmultiflow"], TRIANGLE));
    assert_eq!(v["nu"], serde_json::json!([2, 2, 2]));
    assert_eq!(v["value_x2"], 6);
    // Cost and requirement lines are optional here.
    let bare = "ntb 4 3 3\nt 0 1 2\nc 3 2\ne 0 3 1\ne 1 3 1\ne 2 3 1\n";
    let v = json(&fntb(&["maxmultiflow"], bare));
    assert_eq!(v["value_x2"], 3);
    assert!(v["paths"].as_array().unwrap().iter().all(|p| p["lambda_x2"] == 1));
}

#[test]
fn oracle_commands() {
    let v = json(&fntb(&["oracle", "solve"], STAR));
    assert_eq!(v["cost_x2"], 6);
    assert_eq!(fntb(&["oracle", "solve", "--budget", "5"], STAR).status.code(), Some(1));
    assert_eq!(fntb(&["oracle", "solve"], STAR_R2).status.code(), Some(2));

    let tri = "u 3\n0 1 1 1\n1 2 -1 1\n2 0 -1 1\n";
    let v = json(&fntb(&["oracle", "cut"], tri));
    assert_eq!(v["status"], "violating");
    assert_eq!(v["kappa_x2"], 4);
    let cycle = "u 4\n0 1 1 1\n1 2 -1 1\n2 3 -1 1\n3 0 -inf inf\n";
    assert_eq!(json(&fntb(&["oracle", "cut"], cycle))["status"], "feasible");
}
