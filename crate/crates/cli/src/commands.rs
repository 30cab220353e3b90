//! The three subcommands. Each builds its output files in memory and only
//! touches the output directory once everything has succeeded.

use std::fs;
use std::path::Path;

use dtfl_core::fedsim::{RoundReport, Simulation};
use dtfl_core::model::{check_solution, t_up_g_lower_bound};
use dtfl_core::optimizer::{solve_p, solve_pgld_traced, SolverConfig};
use dtfl_core::oracle::{convexity_probe, oracle_match_probe, pivot_uniqueness_probe};
use serde_json::{json, Value};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::format::{csv, json_num, json_nums, ndjson, num, opt_num};

/// Named output files and their contents.
pub type Files = Vec<(&'static str, String)>;

pub fn write_files(out: &Path, files: &Files) -> Result<()> {
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    for (name, body) in files {
        let path = out.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub seed: Option<u64>,
    pub q_step: Option<f64>,
}

fn solver_with(cfg: &ScenarioConfig, q_step: Option<f64>) -> Result<SolverConfig> {
    let solver = SolverConfig { q_step: q_step.or(cfg.solver.q_step), ..cfg.solver.clone() };
    solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(solver)
}

/// `q_sweep.csv`, `lambda_trace.csv` and `summary.json`.
pub fn solve_files(cfg: &ScenarioConfig, opts: &SolveOptions) -> Result<Files> {
    let inst = cfg.instance();
    let solver = solver_with(cfg, opts.q_step)?;
    let out = solve_p(&inst.glds, &inst.blds, &inst.sys, &solver)?;
    let s = &out.solution;

    let sweep = csv(
        &["Q", "t_hat_B", "T_GLD", "T_BLD", "T"],
        out.sweep.iter().map(|p| vec![num(p.q_agg), num(p.t_hat_b), num(p.t_gld), num(p.t_bld), num(p.t_total)]),
    );

    let traced = solve_pgld_traced(&inst.glds, &inst.blds, s.q_agg, &inst.sys, &solver)?;
    let mut header = vec!["iteration".to_string()];
    header.extend(inst.glds.iter().map(|g| format!("lambda_{}", g.index)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let trace = csv(
        &header,
        traced.trace.iter().enumerate().map(|(k, l)| {
            let mut row = vec![(k + 1).to_string()];
            row.extend(l.iter().map(|&v| num(v)));
            row
        }),
    );

    let constraints = check_solution(s, &inst.glds, &inst.blds, &inst.sys)?;
    let summary = json!({
        "T_star": json_num(s.t_total),
        "Q_star": json_num(s.q_agg),
        "y": json_num(s.y),
        "t_up_G": json_num(s.t_up_g),
        "t_up_B": json_num(s.t_up_b),
        "T_GLD": json_num(s.t_gld),
        "T_BLD": json_num(s.t_bld),
        "q": json_nums(&s.q),
        "cpu_rates": json_nums(&s.cpu_rates),
        "tx_powers": json_nums(&s.tx_powers),
        "gld_indices": inst.glds.iter().map(|g| g.index).collect::<Vec<_>>(),
        "q_step": json_num(out.q_step),
        "grid_points": out.sweep.len() + out.infeasible.len() + out.uncertified.len(),
        "infeasible_q": json_nums(&out.infeasible),
        "uncertified": out.uncertified.iter().map(|u| json!({
            "Q": json_num(u.q_agg), "residual": json_num(u.residual), "gap": json_num(u.gap),
        })).collect::<Vec<_>>(),
        "dual": {
            "iterations": out.best.iterations,
            "converged": out.best.converged,
            "residual": json_num(out.best.residual),
            "gap": json_num(out.best.gap),
            "lambdas": json_nums(&out.best.dual.lambdas),
        },
        "constraints": {
            "energy": json_num(constraints.energy),
            "cpu": json_num(constraints.cpu),
            "power": json_num(constraints.power),
            "jamming": json_num(constraints.jamming),
            "aggregate": json_num(constraints.aggregate),
            "secrecy": json_num(constraints.secrecy),
        },
        "seed": opts.seed.unwrap_or(cfg.seed),
    });
    let summary = serde_json::to_string_pretty(&summary).expect("JSON values serialize") + "\n";
    Ok(vec![("q_sweep.csv", sweep), ("lambda_trace.csv", trace), ("summary.json", summary)])
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    pub seed: Option<u64>,
    pub rounds: Option<u32>,
    pub no_verify: bool,
    pub q_step: Option<f64>,
}

fn round_records(r: &RoundReport) -> impl Iterator<Item = Value> + '_ {
    let clusters = r.clusters.iter().map(move |c| {
        json!({
            "round": r.round,
            "cluster_id": c.cluster_id,
            "T_total": opt_num(r.t_total),
            "accuracy": json_num(c.accuracy),
            "blocks": 1,
            "verified_count": usize::from(c.verified),
            "verified": c.verified,
            "accepted": c.accepted,
            "validator_id": r.validator_id,
            "reputation": json_num(c.reputation),
            "participants": c.participants,
            "synced_blds": c.synced_blds,
            "stale_blds": c.stale_blds,
        })
    });
    let total = json!({
        "round": r.round,
        "cluster_id": null,
        "T_total": opt_num(r.t_total),
        "accuracy": json_num(r.accuracy),
        "blocks": r.blocks_appended,
        "verified_count": r.verified_count,
        "validator_id": r.validator_id,
        "Q": opt_num(r.q_agg),
        "bytes": r.bytes_appended,
        "prior_final_verified": r.prior_final_verified,
    });
    clusters.chain(core::iter::once(total))
}

/// `rounds.ndjson`, `ledger.ndjson`, `blocks.csv` and `accuracy.csv`.
pub fn sim_files(cfg: &ScenarioConfig, opts: &SimOptions) -> Result<Files> {
    let inst = cfg.instance();
    let solver = solver_with(cfg, opts.q_step)?;
    let sim_cfg = cfg.sim_config(opts.seed.unwrap_or(cfg.seed), cfg.sim.verify && !opts.no_verify);
    let mut sim = Simulation::new(&inst, sim_cfg, &solver)?;
    let rounds = opts.rounds.unwrap_or(cfg.rounds);
    let mut reports = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        reports.push(sim.run_round()?);
    }

    let round_log = ndjson(reports.iter().flat_map(round_records));
    let ledger = ndjson(sim.ledger().blocks().iter().map(|b| serde_json::to_value(b).expect("blocks serialize")));
    let report = sim.block_report();
    let blocks = csv(
        &["round", "proposed_blocks", "baseline_blocks", "proposed_bytes", "baseline_bytes"],
        report.rows.iter().map(|row| {
            vec![
                row.round.to_string(),
                row.proposed_blocks.to_string(),
                row.baseline_blocks.to_string(),
                row.proposed_bytes.to_string(),
                row.baseline_bytes.to_string(),
            ]
        }),
    );
    let accuracy = csv(
        &["round", "accuracy", "mean_cluster_accuracy", "verified_count"],
        reports.iter().map(|r| {
            let mean = r.clusters.iter().map(|c| c.accuracy).sum::<f64>() / r.clusters.len() as f64;
            vec![r.round.to_string(), num(r.accuracy), num(mean), r.verified_count.to_string()]
        }),
    );
    Ok(vec![
        ("rounds.ndjson", round_log),
        ("ledger.ndjson", ledger),
        ("blocks.csv", blocks),
        ("accuracy.csv", accuracy),
    ])
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// Relative bump added to the solver's deadline before the oracle
    /// comparison. Fault injection only.
    pub perturb_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<ProbeRow>,
    /// Failing cases keyed by probe name.
    pub counterexamples: Value,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<18} {:<6} {}\n", "probe", "result", "detail");
        for r in &self.rows {
            out.push_str(&format!("{:<18} {:<6} {}\n", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail));
        }
        out
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            return Ok(self);
        }
        let failed = self.rows.iter().filter(|r| !r.passed).map(|r| r.name.to_string()).collect();
        Err(CliError::ProbeFailure { failed, counterexamples: self.counterexamples })
    }
}

/// Oracle comparison, convexity scan and pivot uniqueness.
pub fn verify(cfg: &ScenarioConfig, opts: &VerifyOptions) -> Result<VerifyReport> {
    let inst = cfg.instance();
    let seed = opts.seed.unwrap_or(cfg.seed);
    let trials = opts.trials.unwrap_or(cfg.probes.pivot_trials);
    if trials == 0 {
        return Err(CliError::Config("pivot uniqueness probe needs at least one trial".into()));
    }
    let mut rows = Vec::new();
    let mut counterexamples = serde_json::Map::new();

    let mut oracle_cfg = cfg.probes.oracle.clone();
    if let Some(p) = opts.perturb_y {
        oracle_cfg.y_scale *= 1.0 + p;
    }
    let oracle = oracle_match_probe(&inst.glds, &inst.blds, &inst.sys, &cfg.solver, &oracle_cfg, seed)?;
    let within = oracle.cases.iter().filter(|c| c.passed).count();
    rows.push(ProbeRow {
        name: "oracle_match",
        passed: oracle.passed(),
        detail: format!(
            "{within}/{} Q values within {}, worst {}",
            oracle.cases.len(),
            num(oracle_cfg.tolerance),
            num(oracle.worst)
        ),
    });
    if !oracle.passed() {
        let bad: Vec<Value> = oracle
            .cases
            .iter()
            .filter(|c| !c.passed)
            .map(|c| {
                json!({
                    "Q": json_num(c.q_agg),
                    "solver_objective": opt_num(c.solver_objective),
                    "oracle_objective": json_num(c.oracle_objective),
                    "relative_error": json_num(c.relative_error),
                })
            })
            .collect();
        counterexamples.insert("oracle_match".into(), Value::Array(bad));
    }

    let t_lb = t_up_g_lower_bound(&inst.glds, &inst.sys);
    let range = (t_lb, cfg.probes.convexity_factor * t_lb);
    let reports: Vec<_> = inst.glds.iter().map(|g| convexity_probe(g, &inst.sys, range)).collect();
    let ok = reports.iter().filter(|r| r.all_positive || r.degenerate).count();
    let degenerate = reports.iter().filter(|r| r.degenerate).count();
    let worst = reports.iter().filter(|r| !r.degenerate).map(|r| r.min_value).fold(f64::INFINITY, f64::min);
    rows.push(ProbeRow {
        name: "convexity",
        passed: ok == reports.len(),
        detail: format!(
            "{ok}/{} GLDs positive at all {} points, min {}{}",
            reports.len(),
            reports.first().map_or(0, |r| r.points.len()),
            num(worst),
            if degenerate > 0 { format!(", {degenerate} degenerate") } else { String::new() }
        ),
    });
    let bad: Vec<Value> = reports
        .iter()
        .filter(|r| !(r.all_positive || r.degenerate))
        .map(|r| {
            let points: Vec<Value> = r
                .points
                .iter()
                .filter(|p| p.1.is_nan() || p.1 <= 0.0)
                .map(|&(t, v)| json!([json_num(t), json_num(v)]))
                .collect();
            json!({ "index": r.index, "nonpositive": points })
        })
        .collect();
    if !bad.is_empty() {
        counterexamples.insert("convexity".into(), Value::Array(bad));
    }

    let pivot = pivot_uniqueness_probe(seed, trials)?;
    rows.push(ProbeRow {
        name: "pivot_uniqueness",
        passed: pivot.passed(),
        detail: format!(
            "{} trials, {} checked, {} tied, {} counterexamples",
            pivot.trials,
            pivot.checked,
            pivot.degenerate,
            pivot.counterexamples.len()
        ),
    });
    if !pivot.passed() {
        counterexamples
            .insert("pivot_uniqueness".into(), serde_json::to_value(&pivot.counterexamples).expect("serializes"));
    }

    Ok(VerifyReport { rows, counterexamples: Value::Object(counterexamples) })
}
