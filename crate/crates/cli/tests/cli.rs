use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spanner(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spanner"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPANNER_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().next().expect("output line")).expect("json line")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const C4: &str = "4 4\n0 1 1\n1 2 1\n2 3 1\n3 0 1\n";

#[test]
fn solve_p3_reports_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p3.txt", "3 2\n0 1 1\n1 2 1\n");
    for solver in ["pb", "ab", "bg"] {
        let out = spanner(&["solve", "p3.txt", "--solver", solver, "--alpha", "2"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{solver}");
        assert_eq!(json(&out)["primal"], 2.0);
    }
}

#[test]
fn verify_full_c4() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c4.txt", C4);
    let out = spanner(&["verify", "c4.txt", "--alpha", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["worst_ratio"], 1.0);
    write(dir.path(), "three.txt", "0 1 2");
    let out = spanner(&["verify", "c4.txt", "--alpha", "2", "--solution", "three.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["worst_ratio"], 3.0);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c4.txt", C4);
    for args in [
        vec!["solve", "c4.txt"],
        vec!["solve", "c4.txt", "--alpha", "2", "--solver", "ab", "--mu", "2"],
        vec!["solve", "c4.txt", "--alpha", "2", "--solver", "bg", "--no-fix"],
        vec!["solve", "c4.txt", "--alpha", "2", "--mu", "4"],
        vec!["solve", "c4.txt", "--alpha", "0.5"],
        vec!["frobnicate"],
    ] {
        assert_eq!(spanner(&args, dir.path()).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(spanner(&["solve", "nope.txt", "--alpha", "2"], dir.path()).status.code(), Some(1));
    assert_eq!(spanner(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn limits_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c4.txt", C4);
    let out = spanner(&["solve", "c4.txt", "--alpha", "2", "--node-limit", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "bound_only");
}

fn masked(line: &str) -> Value {
    let mut v: Value = serde_json::from_str(line).unwrap();
    for (k, x) in v.as_object_mut().unwrap().iter_mut() {
        if k.ends_with("_secs") {
            *x = Value::Null;
        }
    }
    v
}

#[test]
fn records_are_reproducible_and_summarized() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = spanner(&["generate", "--family", "er", "--nodes", "12", "--degree", "4", "--weights", "wn", "--seed", "5", "--out", "g.txt"], d);
    assert_eq!(gen.status.code(), Some(0));
    assert!(d.join("g.txt.json").exists());
    for _ in 0..2 {
        for solver in ["pb", "ab"] {
            let out = spanner(&["solve", "g.txt", "--solver", solver, "--alpha", "1.5", "--out", "runs.jsonl"], d);
            assert_eq!(out.status.code(), Some(0));
        }
    }
    let text = std::fs::read_to_string(d.join("runs.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(masked(lines[0]), masked(lines[2]));
    assert_eq!(masked(lines[1]), masked(lines[3]));
    let first = masked(lines[0]);
    assert_eq!(first["instance"], "er_n12_wn_s5");
    assert_eq!(first["family"], "er");
    assert_eq!(first["primal"], masked(lines[1])["primal"]);
    let csv = std::fs::read_to_string(d.join("runs.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("family,nodes,weight_model,alpha,solver,runs,optimal"));
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("er,12,wn,1.5,pb,2,2,"));
}

#[test]
fn env_var_sets_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c4.txt", C4);
    let out = Command::new(env!("CARGO_BIN_EXE_spanner"))
        .args(["solve", "c4.txt", "--alpha", "2"])
        .current_dir(dir.path())
        .env("SPANNER_OUT_DIR", dir.path().join("res"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("res/runs.jsonl").exists());
    assert!(dir.path().join("res/runs.csv").exists());
}

#[test]
fn small_oracle_bench_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = spanner(&["bench", "--suite", "small-oracle", "--count", "12", "--out", "bench"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("pb/ab/oracle agree on 12"), "{stdout}");
    let text = std::fs::read_to_string(dir.path().join("bench/runs.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 48);
    assert!(dir.path().join("bench/runs.csv").exists());
}

#[test]
fn export_lp_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c4.txt", C4);
    let out = spanner(&["export-lp", "c4.txt", "--alpha", "2", "--no-fix", "--out", "c4.lp"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let counts = &json(&out)["counts"];
    assert_eq!(counts["flow_vars_total"], 32);
    let text = std::fs::read_to_string(dir.path().join("c4.lp")).unwrap();
    let parsed = spanner_lp::parse_lp(&text).unwrap();
    assert_eq!(parsed.var_names.len(), 4 + 32);
    assert_eq!(parsed.num_rows() as u64, counts["rows"].as_u64().unwrap());
    let ledger: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c4.lp.fixed.json")).unwrap()).unwrap();
    assert_eq!(ledger["fixed"].as_array().unwrap().len(), 0);

    // with fixing, mandatory edges show up as fixed bounds
    let out = spanner(&["export-lp", "c4.txt", "--alpha", "2", "--out", "fixed.lp"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let parsed = spanner_lp::parse_lp(&std::fs::read_to_string(dir.path().join("fixed.lp")).unwrap()).unwrap();
    let fixed_x = (0..4).filter(|&j| parsed.var_names[j].starts_with('x') && parsed.bounds[j] == (1.0, 1.0)).count();
    assert_eq!(fixed_x, 4);
}

#[test]
fn oracle_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.txt", "3 3\n0 1 1\n1 2 1\n0 2 2\n");
    let out = spanner(&["oracle", "tri.txt", "--alpha", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["primal"], 2.0);
}
