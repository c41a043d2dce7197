use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hyperham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperham")).args(args).env_remove("HYPERHAM_WORKERS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn edge_lines(file: &str) -> usize {
    let text = std::fs::read_to_string(file).unwrap();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<usize> = lines.next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    let rest = lines.count();
    assert_eq!(header[2], rest);
    rest
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let out = path(dir, name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", &out]);
    let o = hyperham(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn gen_models() {
    let dir = TempDir::new().unwrap();
    assert_eq!(edge_lines(&gen(&dir, "c.txt", &["--model", "complete", "--n", "6", "--k", "3"])), 20);
    assert_eq!(edge_lines(&gen(&dir, "h.txt", &["--model", "h0", "--n", "10", "--k", "3", "--alpha", "0.2"])), 64);
    assert_eq!(edge_lines(&gen(&dir, "g.txt", &["--model", "gnp", "--n", "10", "--k", "3", "--p", "0", "--seed", "1"])), 0);
    let u1 = gen(&dir, "u1.txt", &["--model", "union", "--n", "10", "--k", "3", "--alpha", "0.2", "--p", "0.1", "--seed", "5"]);
    let u2 = gen(&dir, "u2.txt", &["--model", "union", "--n", "10", "--k", "3", "--alpha", "0.2", "--p", "0.1", "--seed", "5"]);
    assert_eq!(std::fs::read(&u1).unwrap(), std::fs::read(&u2).unwrap());
    assert!(edge_lines(&u1) >= 64);
    assert_eq!(hyperham(&["gen", "--model", "h0", "--n", "10", "--k", "3", "--alpha", "0"]).status.code(), Some(1));
}

#[test]
fn solve_exit_codes() {
    let dir = TempDir::new().unwrap();
    let complete = gen(&dir, "c.txt", &["--model", "complete", "--n", "12", "--k", "3"]);
    let wit = path(&dir, "w.txt");
    let o = hyperham(&["solve", "--input", &complete, "--ell", "2", "--verify-oracle", "--witness-out", &wit]);
    assert_eq!(o.status.code(), Some(0));
    let rec: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["outcome"]["status"], "success");
    assert_eq!(rec["oracle"], "YES");
    let v = hyperham(&["validate", "--graph", &complete, "--witness", &wit, "--ell", "2"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout(&v).trim(), "valid");

    let empty = gen(&dir, "e.txt", &["--model", "gnp", "--n", "12", "--k", "3", "--p", "0"]);
    let o = hyperham(&["solve", "--input", &empty, "--ell", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let rec: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["outcome"]["status"], "failure");
    assert!(rec["outcome"]["stage"].is_string());

    let bad = path(&dir, "bad.txt");
    std::fs::write(&bad, "3 5 1\n0 1\n").unwrap();
    assert_eq!(hyperham(&["solve", "--input", &bad, "--ell", "2"]).status.code(), Some(1));
    assert_eq!(hyperham(&["solve", "--input", &path(&dir, "missing.txt"), "--ell", "2"]).status.code(), Some(1));
    assert_eq!(hyperham(&["solve", "--ell", "2"]).status.code(), Some(1));
}

#[test]
fn validate_reports_the_defect() {
    let dir = TempDir::new().unwrap();
    // a tight 8-cycle and nothing else
    let g = path(&dir, "g.txt");
    let edges: Vec<String> = (0..8).map(|i| {
        let mut e = [i, (i + 1) % 8, (i + 2) % 8];
        e.sort();
        format!("{} {} {}", e[0], e[1], e[2])
    }).collect();
    std::fs::write(&g, format!("3 8 8\n{}\n", edges.join("\n"))).unwrap();
    let w = path(&dir, "w.txt");
    std::fs::write(&w, "0 1 2 3 4 5 6 7\n").unwrap();
    assert_eq!(hyperham(&["validate", "--graph", &g, "--witness", &w, "--ell", "2"]).status.code(), Some(0));

    std::fs::write(&w, "0 1 2 4 3 5 6 7\n").unwrap();
    let o = hyperham(&["validate", "--graph", &g, "--witness", &w, "--ell", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("window 1"), "{}", stdout(&o));

    // every window of a shorter cycle is an edge of the complete graph
    let c = gen(&dir, "c.txt", &["--model", "complete", "--n", "8", "--k", "3"]);
    std::fs::write(&w, "0 1 2 3 4 5\n").unwrap();
    let o = hyperham(&["validate", "--graph", &c, "--witness", &w, "--ell", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("not covered"), "{}", stdout(&o));
}

#[test]
fn oracle_answers() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.txt", &["--model", "complete", "--n", "6", "--k", "3"]);
    let o = hyperham(&["oracle", "--input", &c, "--ell", "2"]);
    assert_eq!(stdout(&o).lines().next(), Some("YES"));
    assert_eq!(stdout(&o).lines().count(), 2);
    let h = gen(&dir, "h.txt", &["--model", "h0", "--n", "6", "--k", "3", "--alpha", "0.17"]);
    assert_eq!(stdout(&hyperham(&["oracle", "--input", &h, "--ell", "2"])).trim(), "NO");
    let h = gen(&dir, "h9.txt", &["--model", "h0", "--n", "9", "--k", "3", "--alpha", "0.25"]);
    assert_eq!(stdout(&hyperham(&["oracle", "--input", &h, "--ell", "2", "--node-limit", "10"])).trim(), "UNKNOWN");
    let o = hyperham(&["oracle", "--input", &c, "--ell", "2", "--count", "1"]);
    assert_eq!(stdout(&o).trim(), "120");
}

#[test]
fn bounds_report() {
    let o = hyperham(&["bounds", "--k", "3", "--ell", "2", "--a", "2", "--n", "100", "--p", "0.01", "--alpha", "0.1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["phi"].as_f64().unwrap() - 1e4).abs() < 1e-6);
    let want = 0.5f64.powf(1.0 / 7.0) * 100f64.powf(-1.0 - 2.0 / 7.0);
    assert!((v["sharpness_threshold"].as_f64().unwrap() - want).abs() < 1e-15);
    assert_eq!(hyperham(&["bounds", "--k", "3", "--ell", "2", "--a", "2", "--n", "100", "--p", "0"]).status.code(), Some(1));
}

#[test]
fn shave_summary() {
    let dir = TempDir::new().unwrap();
    let g = path(&dir, "g.txt");
    std::fs::write(&g, "3 6 1\n0 1 2\n").unwrap();
    let out = path(&dir, "s.txt");
    let o = hyperham(&["shave", "--input", &g, "--ell", "2", "--theta", "2", "-o", &out]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["edges_after"], 0);
    assert_eq!(edge_lines(&out), 0);
}

fn summaries(csv: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(csv)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("summary"))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_extremes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let o = hyperham(&[
        "sweep", "--k", "3", "--ell", "2", "--n", "12", "--grid", "0", "--trials", "1", "--model", "gnp-only", "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summaries(&out);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0][17], "0.000000");

    let o = hyperham(&["sweep", "--k", "3", "--ell", "2", "--n", "12", "--grid", "1", "--trials", "3", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(summaries(&out)[0][17], "1.000000");
}
