use std::path::Path;
use std::process::{Command, Output};

fn shadowpca(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowpca"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const TFIM_SPEC: &str = r#"{
  "model": {"name": "tfim-1d"},
  "L": 6,
  "grid": {"linear": {"param": "h", "start": 0.5, "stop": 1.5, "steps": 6}},
  "mode": "both",
  "N": 400,
  "seed": 11,
  "k": 3
}"#;

#[test]
fn sweep_writes_results_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), TFIM_SPEC).unwrap();
    let o = shadowpca(&["sweep", "--spec", "spec.json", "--out", "run"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run/results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "grid_index,h,mode,lambda1,lambda2,lambda3,ratio,trace,degenerate,pinned,wall_ms,error"
    );
    assert_eq!(lines.count(), 12);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["points"].as_array().unwrap().len(), 6);
    assert_eq!(manifest["spec"]["seed"], 11);
}

#[test]
fn repeated_sweeps_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), TFIM_SPEC).unwrap();
    for (out, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let o = shadowpca(&["sweep", "--spec", "spec.json", "--out", out, "--workers", workers], dir.path());
        assert_eq!(code(&o), 0);
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("results.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("a"), read("c"));
}

#[test]
fn partial_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // Without pinning strings the auto policy fails on quasi-degenerate
    // Kitaev points.
    let spec = r#"{"model": {"name": "kitaev"}, "L": 2,
        "grid": {"linear": {"param": "Jx", "tied": ["Jy"], "start": 0.05, "stop": 0.3, "steps": 6,
                 "remainder": {"param": "Jz", "total": 1.0}}}}"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();
    let o = shadowpca(&["sweep", "--spec", "spec.json", "--out", "run"], dir.path());
    assert_eq!(code(&o), 1);
    let csv = std::fs::read_to_string(dir.path().join("run/results.csv")).unwrap();
    assert!(csv.lines().skip(1).any(|l| l.contains("pinning")));
}

#[test]
fn invalid_configuration_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"model": {"name": "tfim-1d"}, "L": 4}"#).unwrap();
    assert_eq!(code(&shadowpca(&["sweep", "--spec", "bad.json", "--out", "x"], dir.path())), 2);
    assert_eq!(code(&shadowpca(&["sweep", "--spec", "missing.json", "--out", "x"], dir.path())), 2);
    assert_eq!(code(&shadowpca(&["oracle", "--model", "potts", "--L", "4", "--out", "o.json"], dir.path())), 2);
    assert_eq!(
        code(&shadowpca(&["oracle", "--model", "tfim-1d", "--params", "g=1", "--L", "4", "--out", "o.json"], dir.path())),
        2
    );
    assert_eq!(code(&shadowpca(&["no-such-command"], dir.path())), 2);
}

#[test]
fn sample_spectrum_and_render_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let o = shadowpca(args, d);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    };
    run(&["sample", "--model", "tfim-1d", "--params", "h=1", "--L", "5", "--shots", "300", "--seed", "4", "--out", "shots.ndjson", "--state-out", "state.bin"]);
    let shots = std::fs::read_to_string(d.join("shots.ndjson")).unwrap();
    assert_eq!(shots.lines().count(), 301);
    assert!(shots.lines().next().unwrap().contains("\"N\":300"));
    // 8-byte magic, 8-byte size, 32 complex amplitudes.
    assert_eq!(std::fs::metadata(d.join("state.bin")).unwrap().len(), 16 + 32 * 16);

    run(&["spectrum", "--shots", "shots.ndjson", "--k", "4", "--out", "spectrum.json", "--covariance-out", "cov.csv"]);
    let spec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(spec["lambdas"].as_array().unwrap().len(), 4);
    let cov = std::fs::read_to_string(d.join("cov.csv")).unwrap();
    assert_eq!(cov.lines().count(), 15);
    assert!(cov.lines().all(|l| l.split(',').count() == 15));

    run(&["render", "--in", "cov.csv", "--kind", "covariance-heatmap", "--out", "cov.svg"]);
    assert_eq!(std::fs::read_to_string(d.join("cov.svg")).unwrap().matches("class=\"cell\"").count(), 225);
    run(&["render", "--in", "shots.ndjson", "--kind", "scatter", "--out", "scatter.svg"]);
    assert_eq!(std::fs::read_to_string(d.join("scatter.svg")).unwrap().matches("class=\"point\"").count(), 300);
}

#[test]
fn oracle_compare_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = shadowpca(
        &["oracle", "--model", "tfim-1d", "--params", "h=1", "--L", "4", "--mode", "paper", "--out", "o.json", "--tables-out", "t.csv"],
        d,
    );
    assert_eq!(code(&o), 0);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("o.json")).unwrap()).unwrap();
    assert_eq!(rep["mode"], "paper");
    assert!(rep["mode_comparison"]["max_same_site_deviation"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_to_string(d.join("t.csv")).unwrap().starts_with("kind,i,alpha,j,beta,value"));

    let o = shadowpca(&["compare", "--model", "tfim-1d", "--params", "h=1", "--L", "4", "--shots-N", "500"], d);
    assert_eq!(code(&o), 0);
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rep["max_abs_delta_c"].as_f64().unwrap() < 0.2);

    let o = shadowpca(&["export", "--model", "kitaev", "--params", "Jx=1,Jy=1,Jz=1", "--L", "2", "--out", "k.json"], d);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("k.json")).unwrap()).unwrap();
    assert_eq!(m["n_sites"], 8);
    assert_eq!(m["lattice"]["bonds"].as_array().unwrap().len(), 12);
}

#[test]
fn line_and_ternary_from_results() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("line.json"), TFIM_SPEC).unwrap();
    std::fs::write(
        d.join("tern.json"),
        r#"{"model": {"name": "cluster-ising"}, "L": 5, "grid": {"ternary": {"params": ["g0", "g1", "g2"], "total": 4, "resolution": 4}}}"#,
    )
    .unwrap();
    for (spec, out) in [("line.json", "l"), ("tern.json", "t")] {
        assert_eq!(code(&shadowpca(&["sweep", "--spec", spec, "--out", out], d)), 0);
    }
    let o = shadowpca(&["render", "--in", "l/results.csv", "--kind", "line", "--mode", "oracle-exact", "--out", "l.svg"], d);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(d.join("l.svg")).unwrap();
    assert_eq!(svg.matches("class=\"series\"").count(), 3);
    let o = shadowpca(&["render", "--in", "t/results.csv", "--kind", "ternary-heatmap", "--column", "ratio", "--out", "t.svg"], d);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(d.join("t.svg")).unwrap().matches("class=\"cell\"").count(), 15);
}
