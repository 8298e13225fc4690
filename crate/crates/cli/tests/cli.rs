use std::path::Path;
use std::process::{Command, Output};

fn gmsnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmsnet"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .env("RUST_BACKTRACE", "0")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gmsnet(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = gmsnet(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn small_network(dir: &Path, name: &str, seed: &str) {
    ok(dir, &["gen", "--family", "irregular", "--dims", "16,16", "--removal-prob", "0.1", "--seed", seed, "--out", name]);
}

#[test]
fn gen_writes_network_files_and_reports_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(tmp.path(), &["gen", "--family", "regular", "--dims", "6,5", "--seed", "2", "--out", "net"]);
    assert_eq!(out.trim(), "30 nodes, 49 edges");
    for f in ["nodes.csv", "edges.csv", "meta.json"] {
        assert!(tmp.path().join("net").join(f).exists(), "{f} missing");
    }
    let meta = json(&tmp.path().join("net/meta.json"));
    assert_eq!(meta["seed"], 2);
    let info = ok(tmp.path(), &["info", "--network", "net"]);
    assert!(info.contains("nodes:      30"));
    assert!(info.contains("label top"));
}

#[test]
fn gen_requires_a_seed_and_a_known_family() {
    let tmp = tempfile::tempdir().unwrap();
    fails(tmp.path(), &["gen", "--family", "regular", "--dims", "6,5", "--out", "net"]);
    let err = fails(tmp.path(), &["gen", "--family", "hexagonal", "--dims", "6,5", "--seed", "1", "--out", "net"]);
    assert!(err.contains("unknown network family"));
}

#[test]
fn config_file_values_apply_flags_win_and_unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("run.toml"),
        "seed = 5\n[network]\nfamily = \"regular\"\ndims = [7, 4]\n[time]\nsteps = 3\nt_final = 0.3\n",
    )
    .unwrap();
    let out = ok(d, &["--config", "run.toml", "gen", "--seed", "9", "--out", "net"]);
    assert_eq!(out.trim(), "28 nodes, 45 edges");
    assert_eq!(json(&d.join("net/meta.json"))["seed"], 9);
    ok(d, &["--config", "run.toml", "solve-fine", "--network", "net", "--out", "fine"]);
    let run = json(&d.join("fine/run.json"));
    assert_eq!(run["steps"], 3);
    std::fs::write(d.join("bad.toml"), "[network]\nfamilly = \"regular\"\n").unwrap();
    fails(d, &["--config", "bad.toml", "info", "--network", "net"]);
}

#[test]
fn multiscale_run_needs_a_basis_for_the_same_network() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_network(d, "a", "1");
    small_network(d, "b", "2");
    let err = fails(d, &["ms", "--network", "a", "--out", "ms"]);
    assert!(err.contains("--basis-dir"), "{err}");
    let basis = ok(d, &["basis", "--network", "a", "--grid", "3,3", "--m", "2", "--out", "basis_a"]);
    assert!(basis.contains("coarse DOF:"));
    let err = fails(d, &["ms", "--network", "b", "--basis-dir", "basis_a", "--out", "ms"]);
    assert!(err.contains("different network"), "{err}");
    let err = fails(d, &["ms", "--network", "a", "--basis-dir", "basis_a", "--dirichlet", "left=1", "--out", "ms"]);
    assert!(err.contains("Dirichlet"), "{err}");
    ok(d, &["ms", "--network", "a", "--basis-dir", "basis_a", "--out", "ms"]);
    assert!(d.join("ms/u_ms.csv").exists());
}

#[test]
fn reports_carry_errors_and_timings_only_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_network(d, "net", "3");
    ok(d, &["solve-fine", "--network", "net", "--t-final", "5", "--out", "fine"]);
    ok(d, &["ms", "--network", "net", "--grid", "3,3", "--m", "3", "--build-basis", "--t-final", "5", "--reference", "fine/u.csv", "--out", "plain"]);
    let report = json(&d.join("plain/report.json"));
    for key in ["e1_h", "e2_h", "e1_H", "DOF_h", "DOF_H", "M", "seed", "config"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["timings"], serde_json::json!({}));
    assert_eq!(report["M"], 3);
    ok(d, &["--timings", "ms", "--network", "net", "--grid", "3,3", "--m", "3", "--build-basis", "--t-final", "5", "--reference", "fine/u.csv", "--out", "timed"]);
    let timed = json(&d.join("timed/report.json"));
    assert!(timed["timings"]["online"].as_f64().is_some());
    assert!(timed["timings"]["offline"].as_f64().is_some());
    assert_eq!(timed["e1_h"], report["e1_h"]);
}

#[test]
fn sweep_writes_table_plot_and_per_m_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_network(d, "net", "4");
    ok(d, &["solve-fine", "--network", "net", "--t-final", "5", "--out", "fine"]);
    let out = ok(d, &["ms", "--network", "net", "--grid", "3,3", "--sweep", "4,1,2", "--t-final", "5", "--reference", "fine/u.csv", "--out", "sweep"]);
    assert!(out.contains("nonincreasing in M"));
    for m in [1, 2, 4] {
        assert!(d.join(format!("sweep/M{m}/report.json")).exists());
    }
    let plot = std::fs::read_to_string(d.join("sweep/plot.csv")).unwrap();
    let ms: Vec<&str> = plot.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ms, ["1", "2", "4"]);
    assert!(std::fs::read_to_string(d.join("sweep/table.txt")).unwrap().starts_with("   DOF_H"));
    let err = fails(d, &["ms", "--network", "net", "--sweep", "1,2", "--out", "x"]);
    assert!(err.contains("--reference"));
}

#[test]
fn upscale_and_compare_produce_their_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--family", "regular", "--dims", "20,20", "--seed", "1", "--out", "net"]);
    ok(d, &["solve-fine", "--network", "net", "--t-final", "20", "--out", "fine"]);
    let out = ok(d, &["upscale", "--network", "net", "--grid", "4,4", "--t-final", "20", "--reference", "fine/u.csv", "--out", "up"]);
    assert!(out.contains("DOF_H = 16"), "{out}");
    for f in ["u_up.csv", "cells.csv", "model.json", "report.json", "coarse_network/nodes.csv"] {
        assert!(d.join("up").join(f).exists(), "{f} missing");
    }
    let err = fails(d, &["upscale", "--network", "net", "--grid", "4,4", "--dirichlet", "inlet=1", "--out", "bad"]);
    assert!(err.contains("inlet"));
    let out = ok(d, &["compare", "--network", "net", "--grid", "4,4", "--reference", "fine/u.csv", "--out", "cmp", "fine/u.csv", "up/u_up.csv"]);
    assert!(out.contains("fine/u.csv"));
    let cmp = json(&d.join("cmp/compare.json"));
    assert_eq!(cmp[0]["e1_h"], 0.0);
    assert!(cmp[1]["e1_h"].as_f64().unwrap() > 0.0);

    ok(d, &["gen", "--family", "regular", "--dims", "10,10", "--seed", "1", "--out", "small"]);
    ok(d, &["solve-fine", "--network", "small", "--out", "small_fine"]);
    let err = fails(d, &["compare", "--network", "net", "--reference", "fine/u.csv", "--out", "cmp2", "small_fine/u.csv"]);
    assert!(err.contains("values"), "{err}");
}

#[test]
fn solver_choices_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_network(d, "net", "6");
    ok(d, &["solve-fine", "--network", "net", "--out", "cg"]);
    ok(d, &["solve-fine", "--network", "net", "--solver", "dense-lu-oracle", "--out", "lu"]);
    let out = ok(d, &["compare", "--network", "net", "--grid", "3,3", "--reference", "lu/u.csv", "--out", "cmp", "cg/u.csv"]);
    let cmp = json(&d.join("cmp/compare.json"));
    assert!(cmp[0]["e1_h"].as_f64().unwrap() < 1e-6, "{out}");
    let err = fails(d, &["solve-fine", "--network", "net", "--solver", "gauss-seidel", "--out", "x"]);
    assert!(err.contains("unknown solver"));
}
