use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinning-zeta")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn geometry_exit_codes() {
    assert_eq!(code(&bin(&["geometry", "--seed", "3"])), 0);
    assert_eq!(code(&bin(&["geometry", "--lambda", "0"])), 0);
    assert_eq!(code(&bin(&["geometry", "-D", "point=0.01,0"])), 2);
    let o = bin(&["geometry", "--set", "3"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_keys_are_rejected() {
    let o = bin(&["kernel", "-D", "lamda=1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));
    assert_eq!(code(&bin(&["kernel", "-D", "no-equals-sign"])), 2);
}

#[test]
fn config_layers_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# grid\np1 = 2\np2 = 0.5\nt = 1\nlambda = 0\n").unwrap();
    let p = path.to_str().unwrap();

    let rows = json_lines(&stdout(&bin(&["kernel", "--config", p])));
    assert_eq!(rows[1]["p1"], 2.0);
    assert_eq!(rows[1]["order2"], 0.0);

    let rows = json_lines(&stdout(&bin(&["kernel", "--config", p, "-D", "p1=3", "--p1", "1"])));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["p1"], 1.0);

    fs::write(&path, "config = other.cfg\n").unwrap();
    assert_eq!(code(&bin(&["kernel", "--config", p])), 2);
}

#[test]
fn kernel_flat_node_and_symmetry() {
    let o = bin(&["kernel", "--lambda", "0", "--p1", "1", "--p2", "0", "--t", "1", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema: spinning-zeta/kernel-grid v1");
    assert_eq!(lines[1], "p1,p2,t,order0,order2,order3_value,order3_error");
    let f: Vec<&str> = lines[2].split(',').collect();
    let order0: f64 = f[3].parse().unwrap();
    assert!((order0 - (-1f64).exp()).abs() < 1e-15);
    assert_eq!(f[4], "0");

    let diag = json_lines(&stdout(&bin(&["kernel", "--p1", "1", "--p2", "1", "--t", "0.5"])));
    assert_eq!(diag[1]["order2"], 0.0);

    let a = json_lines(&stdout(&bin(&["kernel", "--p1", "0.3", "--p2", "1.2", "--t", "0.7"])));
    let b = json_lines(&stdout(&bin(&["kernel", "--p1", "1.2", "--p2", "0.3", "--t", "0.7"])));
    let (x, y) = (a[1]["order2"].as_f64().unwrap(), b[1]["order2"].as_f64().unwrap());
    assert!(x != 0.0 && x == -y);
}

#[test]
fn kernel_grid_order() {
    let rows = json_lines(&stdout(&bin(&["kernel", "--p1", "0:1:2", "--p2", "0,1", "--t", "1"])));
    assert_eq!(rows[0]["schema"], "spinning-zeta/kernel-grid");
    let nodes: Vec<(f64, f64)> =
        rows[1..].iter().map(|r| (r["p1"].as_f64().unwrap(), r["p2"].as_f64().unwrap())).collect();
    assert_eq!(nodes, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]);
    assert!(rows[1]["order3_value"].is_null());
}

#[test]
fn zeta_values_and_domain() {
    let rows = json_lines(&stdout(&bin(&["zeta", "--s", "2,2.5", "--lambda", "0", "--order", "0"])));
    let closed = [0.039788735772973836, 0.016886863940264535];
    for (row, c) in rows[1..].iter().zip(closed) {
        let v = row["value"].as_f64().unwrap();
        assert!((v - c).abs() < 1e-6 * c, "{v} vs {c}");
        assert_eq!(row["converged"], true);
    }
    assert_eq!(code(&bin(&["zeta", "--s", "1.4"])), 2);
    assert_eq!(code(&bin(&["zeta", "--s", "2", "--mass-sign", "minus", "-D", "t_max=5"])), 3);
}

#[test]
fn verify_without_interaction_passes() {
    let o = bin(&["verify", "--lambda", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = json_lines(&stdout(&o));
    assert_eq!(rows[0]["schema"], "spinning-zeta/term-report");
    assert!(rows.len() > 1);
}

#[test]
fn unreachable_tolerance_is_non_convergence() {
    let o = bin(&["verify", "-D", "suites=h_pr", "--tol-rel", "1e-12"]);
    assert_eq!(code(&o), 3);
}

fn ledger(dir: &Path, name: &str, seed: &str) -> Vec<u8> {
    let path = dir.join(name);
    let o = bin(&["verify", "-D", "suites=h_diag,bracket,zeta_flat", "--seed", seed, "--output", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    fs::read(path).unwrap()
}

#[test]
fn verify_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = ledger(dir.path(), "a.jsonl", "11");
    let b = ledger(dir.path(), "b.jsonl", "11");
    let c = ledger(dir.path(), "c.jsonl", "12");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn report_summarizes_and_converts() {
    let dir = tempfile::tempdir().unwrap();
    ledger(dir.path(), "l.jsonl", "5");
    let input = dir.path().join("l.jsonl");
    let input = input.to_str().unwrap();

    let o = bin(&["report", "--input", input]);
    assert_eq!(code(&o), 0);
    let s: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(s["schema"], "spinning-zeta/ledger-summary");
    assert_eq!(s["asserted"], s["passed"]);
    assert_eq!(s["status"], 0);

    let o = bin(&["report", "--input", input, "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("# schema: spinning-zeta/term-report v1\nterm_id,"));
    assert!(text.lines().skip(2).all(|l| l.split(',').count() == 8));

    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"schema\":\"spinning-zeta/kernel-grid\",\"version\":1}\n").unwrap();
    assert_eq!(code(&bin(&["report", "--input", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&bin(&["report"])), 2);
}

#[test]
fn geometry_set_selection() {
    let all: Value = serde_json::from_str(stdout(&bin(&["geometry", "-D", "points=20"])).trim()).unwrap();
    assert_eq!(all["sets"].as_array().unwrap().len(), 2);
    let one: Value = serde_json::from_str(stdout(&bin(&["geometry", "-D", "points=20", "--set", "1"])).trim()).unwrap();
    let sets = one["sets"].as_array().unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0]["set"], 1);
}
