use std::path::Path;
use std::process::{Command, Output};

use sparsegrad_experiments::results::strip_timing;
use sparsegrad_experiments::Manifest;

fn sparsegrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsegrad")).args(args).env("SPARSEGRAD_WORKERS", "1").output().unwrap()
}

fn quick_onebar(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["onebar", "-o", out.to_str().unwrap(), "-s", "s_values=[13, 20]", "-s", "restarts=2"];
    args.extend_from_slice(extra);
    sparsegrad(&args)
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn writes_results_traces_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = quick_onebar(&out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = read(&out.join("results.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "id,method,s,re,psnr,exact_recovery,iters,inner_iters,diverged,seconds");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 10);
        assert_eq!(r[0], i.to_string());
        assert!(["tv", "l1l2"].contains(&r[1]));
        let re: f64 = r[3].parse().unwrap();
        assert_eq!(r[5] == "true", re < 1e-6);
        assert!(out.join(format!("trace_{i}.json")).exists());
    }
    let trace: serde_json::Value = serde_json::from_str(&read(&out.join("trace_0.json"))).unwrap();
    assert!(trace["diagnostics"]["lagrangian"].is_array());

    let m = Manifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(m.experiment, "onebar");
    assert_eq!(m.config.s_values, vec![13, 20]);
}

#[test]
fn seeded_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(quick_onebar(&a, &["--seed", "7"]).status.success());
    assert!(quick_onebar(&b, &["--seed", "7"]).status.success());
    let (ca, cb) = (read(&a.join("results.csv")), read(&b.join("results.csv")));
    assert_eq!(strip_timing(&ca).unwrap(), strip_timing(&cb).unwrap());
    assert_eq!(Manifest::load(&a.join("manifest.json")).unwrap().seed, 7);
}

#[test]
fn manifest_rerun_reproduces_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(quick_onebar(&a, &["--seed", "3", "-s", "rho=4.0"]).status.success());
    let manifest = a.join("manifest.json");
    let o = sparsegrad(&["onebar", "--manifest", manifest.to_str().unwrap(), "-o", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(strip_timing(&read(&a.join("results.csv"))).unwrap(), strip_timing(&read(&b.join("results.csv"))).unwrap());
    assert_eq!(read(&manifest), read(&b.join("manifest.json")));
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("twobar.toml");
    std::fs::write(&cfg, "t_values = [1.5]\nrestarts = 1\nmethods = [\"tv\"]\n").unwrap();
    let out = dir.path().join("run");
    let o = sparsegrad(&["twobar", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("results.csv"));
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,tv,1.5,"));
}

#[test]
fn bad_configs_fail_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &str); 4] = [
        ("unknown.toml", "frobnicate = 1\n"),
        ("syntax.toml", "rho = = 2\n"),
        ("range.toml", "rho = -1.0\n"),
        ("kind.toml", "kind = \"ct\"\n"),
    ];
    for (name, text) in cases {
        let cfg = dir.path().join(name);
        std::fs::write(&cfg, text).unwrap();
        let out = dir.path().join(format!("out_{name}"));
        let o = sparsegrad(&["onebar", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert!(!o.status.success(), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{name}");
        assert!(!out.exists(), "{name}");
    }
    let out = dir.path().join("missing");
    let o = sparsegrad(&["onebar", "-c", dir.path().join("nope.toml").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());
    let o = sparsegrad(&["onebar", "-s", "novalue", "-o", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());
}
