use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtfl_cli::{solve_files, ScenarioConfig, SolveOptions};
use serde_json::Value;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn dtfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtfl")).args(args).output().expect("binary runs")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON document")
}

fn toy_json() -> Value {
    serde_json::from_str(&fs::read_to_string(config_path("toy.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let path = dir.join("scenario.json");
    fs::write(&path, v.to_string()).unwrap();
    path
}

#[test]
fn toy_solve_writes_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = dtfl(&["solve", "--config", config_path("toy.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let sweep = fs::read_to_string(out.join("q_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("Q,t_hat_B,T_GLD,T_BLD,T"));
    assert!(sweep.lines().count() > 100);
    let trace = fs::read_to_string(out.join("lambda_trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("iteration,lambda_1,lambda_2"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in ["T_star", "Q_star", "y", "t_up_G", "t_up_B", "q"] {
        assert!(!summary[key].is_null(), "summary lacks {key}");
    }
    assert_eq!(summary["q"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"sys\": ").unwrap();
    let out = dir.path().join("out");
    let res = dtfl(&["solve", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(stderr_json(&res)["error"], "config");
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v = toy_json();
    v["glds"][0]["colour"] = Value::from("blue");
    assert!(ScenarioConfig::parse(&v.to_string()).is_err());
    let mut v = toy_json();
    v["solver"] = serde_json::json!({ "dual_toll": 1e-4 });
    assert!(ScenarioConfig::parse(&v.to_string()).is_err());
}

#[test]
fn optional_fields_take_their_defaults() {
    let mut v = toy_json();
    v["blds"][0].as_object_mut().unwrap().remove("noise");
    v["glds"][1].as_object_mut().unwrap().remove("index");
    let cfg = ScenarioConfig::parse(&v.to_string()).unwrap();
    let inst = cfg.instance();
    assert_eq!(inst.blds[0].noise, cfg.sys.noise_coord);
    assert_eq!(inst.glds[1].index, 2);
    assert_eq!(cfg.solver, dtfl_core::optimizer::SolverConfig::default());
}

#[test]
fn infeasible_scenario_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = toy_json();
    for g in v["glds"].as_array_mut().unwrap() {
        g["jam_power_max"] = Value::from(1e-6);
    }
    let path = write_config(dir.path(), &v);
    let out = dir.path().join("out");
    let res = dtfl(&["solve", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert_eq!(stderr_json(&res)["error"], "infeasible");
    assert!(!out.exists());
}

#[test]
fn zero_rounds_gives_empty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = dtfl(&[
        "sim",
        "--config",
        config_path("toy.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--rounds",
        "0",
    ]);
    assert!(res.status.success());
    assert_eq!(fs::read_to_string(out.join("rounds.ndjson")).unwrap(), "");
    assert_eq!(fs::read_to_string(out.join("ledger.ndjson")).unwrap(), "");
    assert_eq!(fs::read_to_string(out.join("blocks.csv")).unwrap().lines().count(), 1);
    assert_eq!(fs::read_to_string(out.join("accuracy.csv")).unwrap().lines().count(), 1);
}

#[test]
fn sim_logs_one_line_per_cluster_plus_total() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = dtfl(&[
        "sim",
        "--config",
        config_path("toy.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--rounds",
        "3",
    ]);
    assert!(res.status.success());
    let lines: Vec<Value> = fs::read_to_string(out.join("rounds.ndjson"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3 * 3);
    let totals: Vec<&Value> = lines.iter().filter(|l| l["cluster_id"].is_null()).collect();
    assert_eq!(totals.len(), 3);
    assert!(totals.iter().all(|t| t["blocks"] == 3 && t["verified_count"] == 3));
    let ledger = fs::read_to_string(out.join("ledger.ndjson")).unwrap();
    assert_eq!(ledger.lines().count(), 9);
    let first: Value = serde_json::from_str(ledger.lines().next().unwrap()).unwrap();
    assert_eq!(first["subject"]["kind"], "cluster");
}

#[test]
fn no_verify_flag_clears_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = dtfl(&[
        "sim",
        "--config",
        config_path("toy.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--rounds",
        "2",
        "--no-verify",
    ]);
    assert!(res.status.success());
    let ledger = fs::read_to_string(out.join("ledger.ndjson")).unwrap();
    assert!(ledger.lines().all(|l| serde_json::from_str::<Value>(l).unwrap()["verified"] == false));
}

#[test]
fn verify_passes_on_the_reference_instance() {
    let res = dtfl(&["verify", "--config", config_path("table2.json").to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = String::from_utf8(res.stdout).unwrap();
    for probe in ["oracle_match", "convexity", "pivot_uniqueness"] {
        assert!(table.lines().any(|l| l.starts_with(probe) && l.contains("PASS")), "{table}");
    }
}

#[test]
fn perturbed_solver_fails_the_oracle_probe() {
    let res = dtfl(&[
        "verify",
        "--config",
        config_path("table2.json").to_str().unwrap(),
        "--perturb-y",
        "0.1",
        "--trials",
        "20",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let err = stderr_json(&res);
    assert_eq!(err["failed"], serde_json::json!(["oracle_match"]));
    assert!(!err["counterexamples"]["oracle_match"].as_array().unwrap().is_empty());
    assert!(String::from_utf8(res.stdout)
        .unwrap()
        .lines()
        .any(|l| l.starts_with("oracle_match") && l.contains("FAIL")));
}

#[test]
fn zero_trials_is_a_validation_error() {
    let res = dtfl(&["verify", "--config", config_path("toy.json").to_str().unwrap(), "--trials", "0"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn q_step_flag_sets_the_outer_grid() {
    let cfg = ScenarioConfig::load(&config_path("toy.json")).unwrap();
    let coarse = solve_files(&cfg, &SolveOptions { q_step: Some(4e-9), ..SolveOptions::default() }).unwrap();
    let sweep = &coarse.iter().find(|f| f.0 == "q_sweep.csv").unwrap().1;
    let summary: Value = serde_json::from_str(&coarse.iter().find(|f| f.0 == "summary.json").unwrap().1).unwrap();
    assert_eq!(summary["q_step"], 4e-9);
    assert_eq!(sweep.lines().count() - 1, summary["grid_points"].as_u64().unwrap() as usize);
}

#[test]
fn shipped_configs_parse() {
    for name in ["table2.json", "toy.json", "tamper.json"] {
        ScenarioConfig::load(&config_path(name)).unwrap();
    }
}
