use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn xordisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xordisc")).args(args).env_remove("XORDISC_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn generated_net_checks_out() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("net.txt");
    let out = xordisc(&["net", "gen", "--family", "bitrev", "--s", "5", "--points", pts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["minimal_delta"], 0);
    let out = xordisc(&["net", "check", "--in", pts.to_str().unwrap()]);
    let v = json(&out);
    assert_eq!(v["result"]["is_net"], true);
    assert_eq!(v["result"]["s"], 5);
    assert_eq!(v["config"]["action"], "check");
    assert_eq!(v["config"]["delta"], 0);
}

#[test]
fn net_bound_holds_exactly() {
    let out = xordisc(&["theorem", "2.1", "--net", "bitrev", "--s", "4", "--q", "2", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "holds");
    assert_eq!(v["result"]["measured"]["exact"]["value"]["exact"], "10271/18432");
}

#[test]
fn empty_set_has_zero_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "empty.txt", "2 8 0\n");
    let out = xordisc(&["disc", "--in", &p, "--q", "1,2,inf"]);
    assert_eq!(out.status.code(), Some(0));
    for r in json(&out)["result"]["discrepancies"].as_array().unwrap() {
        assert_eq!(r["value"].as_f64(), Some(0.0));
    }
}

#[test]
fn local_value_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    // one point at (1/4, 1/4) inside the box [0, 1/2)^2 of volume 1/4
    let p = write(dir.path(), "one.txt", "# single point\n2 2 1\n1 1\n");
    let out = xordisc(&["disc", "--in", &p, "--anchor", "1,1", "--anchor-precision", "1"]);
    assert_eq!(json(&out)["result"]["local"]["exact"], "3/4");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "set.txt", "2 10 2\n1 2\n3 4\n");
    // 2^{26} exact shifts is past the enumeration guard
    let out = xordisc(&["mean", "--in", &p, "--s", "13", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(xordisc(&["mean", "--in", &p, "--bogus"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.txt", "2 10 3\n1 2\n");
    assert_eq!(xordisc(&["disc", "--in", &bad]).status.code(), Some(2));
    assert_eq!(xordisc(&["disc", "--in", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(xordisc(&["net", "check", "--in", &p, "--csv", "x.csv"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "set.txt", "2 10 3\n1 2\n300 4\n900 700\n");
    let cfg = write(dir.path(), "run.cfg", "# sampled run\nmode = sampled\ncount = 17\nseed = 4\ns = 3\nq = 1,2\n");
    let out = xordisc(&["mean", "--in", &p, "--config", &cfg, "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let first = &v["result"][0];
    assert_eq!(first["mode"]["count"], 17);
    assert_eq!(first["mode"]["seed"], 9);
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
}

#[test]
fn csv_table_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "set.txt", "1 4 2\n3\n9\n");
    let csv = dir.path().join("t.csv");
    let out = dir.path().join("r.json");
    let o = xordisc(&[
        "mean", "--in", &p, "--s", "2", "--q", "2", "--csv", csv.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("s,q,value,lower,upper,lower_confidence,exact_power\n2,2,"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["config"].get("out").is_none());
}

#[test]
fn thread_count_does_not_change_output() {
    let a = xordisc(&["khinchin", "--tables", "20", "--threads", "1"]);
    let b = xordisc(&["khinchin", "--tables", "20", "--threads", "3"]);
    assert_eq!(a.stdout, b.stdout);
}
