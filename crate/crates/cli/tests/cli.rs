use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"{"n_outer_drops": 4, "n_inner_packets": 8, "paths": ["DA2G", "HAP"],
  "outputs": ["kpi_table", "ccdf"], "ccdf_thresholds_s": [0.001, 0.01]}"#;

fn skysim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skysim")).args(args).output().unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_prints_tables_separated_by_blank_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = skysim(&["run", &config(dir.path(), TINY)]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let blocks: Vec<&str> = s.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].starts_with("path,n_links,mean_loss_prob"));
    assert_eq!(blocks[0].lines().count(), 3);
    assert!(blocks[1].starts_with("path,threshold_s,prob"));
}

#[test]
fn out_writes_primary_and_sibling_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.csv");
    let o = skysim(&["run", &config(dir.path(), TINY), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let kpi = std::fs::read_to_string(&out).unwrap();
    assert!(kpi.starts_with("path,"));
    let ccdf = std::fs::read_to_string(dir.path().join("res.ccdf.csv")).unwrap();
    assert_eq!(ccdf.lines().count(), 1 + 2 * 2);
}

#[test]
fn seed_flag_controls_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), TINY);
    let a = stdout(&skysim(&["run", &cfg, "--seed", "5", "--workers", "1"]));
    let b = stdout(&skysim(&["run", &cfg, "--seed", "5", "--workers", "2"]));
    let c = stdout(&skysim(&["run", &cfg, "--seed", "6"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn sweep_adds_coordinate_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = skysim(&[
        "sweep",
        &config(dir.path(), TINY),
        "--param",
        "data_rate",
        "--values",
        "250e3,1e6",
        "--format",
        "jsonl",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let kpi: Vec<serde_json::Value> = s
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["table"] == "kpi")
        .collect();
    assert_eq!(kpi.len(), 4);
    assert_eq!(kpi[0]["data_rate_bps"], 250000.0);
    assert_eq!(kpi[3]["data_rate_bps"], 1000000.0);
}

#[test]
fn optimize_reports_and_flags_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"n_outer_drops": 4, "n_inner_packets": 8, "paths": ["DA2G", "HAP"]}"#);
    let ok = skysim(&["optimize", &cfg, "--eps-th", "1e-3", "--d-th", "0.02", "--p-th", "0.9"]);
    assert_eq!(ok.status.code(), Some(0));
    let s = stdout(&ok);
    let report = s.split("\n\n").last().unwrap();
    assert!(report.starts_with("eps_th,d_th_s,p_th,path"));
    assert!(report.lines().any(|l| l.contains(",HAP,") && l.ends_with(",true,true")));
    let bad = skysim(&["optimize", &cfg, "--eps-th", "1e-12"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = skysim(&["run", &config(dir.path(), "{\n  \"n_outer_drops\": ,\n}")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = skysim(&["run", &config(dir.path(), r#"{"no_such_key": 1}"#)]);
    assert_eq!(o.status.code(), Some(2));

    let o = skysim(&["run", &config(dir.path(), r#"{"scenario": {"swarm_size": 0}}"#)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("swarm_size"));

    let o = skysim(&["sweep", &config(dir.path(), TINY), "--param", "colour", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(skysim(&["preset", "fig42"]).status.code(), Some(2));
    assert_eq!(skysim(&["run", "/nonexistent/exp.json"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("res.csv");
    let o = skysim(&["run", &config(dir.path(), TINY), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn preset_runs_with_small_budget() {
    let o = skysim(&["preset", "fig6", "--samples-outer", "2", "--samples-inner", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("comp_cluster_size,path,"));
}
