//! End-to-end tests of the `opharm` binary: subcommand plumbing, exit
//! codes, and byte-level determinism of emitted reports.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn opharm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opharm"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("opharm_cli_{tag}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(dir: &PathBuf, kind: &str) -> PathBuf {
    let cfg = serde_json::json!({
        "kind": kind,
        "seed": 42,
        "d": 1,
        "n_axis": 16,
        "n": 2,
        "band_m": 5,
        "p_list": [1.0, 2.0],
        "corpus_size": 4,
        "zero_mean": true,
        "scale": { "eps_min": null, "eps_max": 8.0, "k": 64 }
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn run_emits_deterministic_reports() {
    let dir = temp_dir("run");
    let cfg = small_config(&dir, "hardy_equiv");
    for sub in ["a", "b"] {
        let out = dir.join(sub);
        let status = opharm()
            .args([
                "run",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .args(["--format", "csv"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let csv_a = fs::read(dir.join("a/hardy_equiv_seed42.csv")).unwrap();
    let csv_b = fs::read(dir.join("b/hardy_equiv_seed42.csv")).unwrap();
    assert!(!csv_a.is_empty());
    assert_eq!(
        csv_a, csv_b,
        "reports must be byte-identical for a fixed seed"
    );
    let hist_a = fs::read(dir.join("a/hardy_equiv_seed42.hist.json")).unwrap();
    let hist_b = fs::read(dir.join("b/hardy_equiv_seed42.hist.json")).unwrap();
    assert_eq!(hist_a, hist_b);
    // header contract
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("field_id,p,method_a,method_b,norm_a,norm_b,ratio\n"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn run_json_roundtrip_and_seed_override() {
    let dir = temp_dir("json");
    let cfg = small_config(&dir, "hardy_equiv");
    let out = dir.join("out");
    let status = opharm()
        .args([
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .args(["--format", "json", "--seed", "7"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("hardy_equiv_seed7.json")).unwrap();
    let rep = opharm_cli::report::parse_json_report(&text).unwrap();
    assert!(!rep.rows.is_empty());
    assert!(!rep.summary.is_empty());
    // summary geometric mean recomputes from the rows
    for s in &rep.summary {
        let logs: Vec<f64> = rep
            .rows
            .iter()
            .filter(|r| r.p == s.p && r.method_a == s.method_a && r.method_b == s.method_b)
            .map(|r| r.ratio.ln())
            .collect();
        let expect = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        assert!((s.geomean - expect).abs() < 1e-12 * (1.0 + expect));
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bad_config_exits_with_two() {
    let dir = temp_dir("bad");
    let path = dir.join("broken.json");
    fs::write(&path, "{\"kind\": \"hardy_equiv\"").unwrap();
    let status = opharm()
        .args([
            "run",
            "--config",
            path.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // structurally valid JSON violating an invariant is also code 2
    let cfg = serde_json::json!({
        "kind": "hardy_equiv", "seed": 1, "d": 1, "n_axis": 16, "n": 1,
        "band_m": 8, "corpus_size": 2
    });
    fs::write(&path, cfg.to_string()).unwrap();
    let status = opharm()
        .args([
            "run",
            "--config",
            path.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn companion_subcommand_emits_pair_json() {
    let out = opharm()
        .args(["companion", "--phi", "annulus_bump", "--mode", "discrete"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["mode"], "discrete");
    let residual = parsed["residual"].as_f64().unwrap();
    assert!(residual <= 1e-10, "residual {residual}");
    assert_eq!(parsed["xi_grid"].as_array().unwrap().len(), 4096);
    // degenerate symbol: failure with exit code 1
    let out = opharm()
        .args(["companion", "--phi", "zero", "--mode", "continuous"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
