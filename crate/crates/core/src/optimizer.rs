//! Delay minimization for one cluster.
//!
//! For a fixed received jamming level `Q` the GLD problem is convex and is
//! solved by dual decomposition: closed-form deadline `y`, bisection for the
//! upload time `t`, a threshold allocation for the jamming powers `q`, and a
//! projected subgradient step on the energy multipliers. An outer linear
//! search over `Q` trades BLD upload time against GLD energy.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    dt_training_latency, local_energy_for_deadline, min_bld_upload_time, power_unchecked, q_lower_bound, q_upper_bound,
    t_up_g_lower_bound, total_delay, upload_energy_unchecked, y_lower_bound, BldProfile, GldProfile, Solution,
    SystemParams,
};

/// Tuning knobs for [`solve_pgld`] and [`solve_p`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Step of the outer search over `Q`. `None` splits the feasible
    /// interval into 200 steps.
    pub q_step: Option<f64>,
    /// Stop when no multiplier moves by more than this in one iteration.
    pub dual_tol: f64,
    pub max_dual_iters: usize,
    /// Absolute tolerance, in seconds, of the upload-time bisection.
    pub bisection_tol: f64,
    /// Cap on bracket doublings and on bisection halvings.
    pub bisection_max_iters: usize,
    /// Subgradient step constant. `None` uses `1 / max_i E_i^max`.
    pub alpha0: Option<f64>,
    /// Largest accepted relative gap between the recovered primal objective
    /// and the best dual bound.
    pub gap_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            q_step: None,
            dual_tol: 1e-4,
            max_dual_iters: 5000,
            bisection_tol: 1e-12,
            bisection_max_iters: 200,
            alpha0: None,
            gap_tol: 2e-2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let optional = [("q_step", self.q_step), ("alpha0", self.alpha0)];
        for (name, v) in optional {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Validation(format!("solver {name} must be positive, got {v}")));
                }
            }
        }
        let reals = [("dual_tol", self.dual_tol), ("bisection_tol", self.bisection_tol), ("gap_tol", self.gap_tol)];
        for (name, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("solver {name} must be positive, got {v}")));
            }
        }
        if self.max_dual_iters == 0 || self.bisection_max_iters == 0 {
            return Err(Error::Validation("solver iteration caps must be positive".into()));
        }
        Ok(())
    }

    fn alpha0_for(&self, glds: &[GldProfile]) -> f64 {
        self.alpha0.unwrap_or_else(|| {
            let e = glds.iter().map(|g| g.energy_max).fold(0.0, f64::max);
            if e > 0.0 {
                1.0 / e
            } else {
                1.0
            }
        })
    }
}

/// Energy multipliers and the diminishing step schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub lambdas: Vec<f64>,
    pub alpha0: f64,
    /// Index `n` of the next update; its step is `alpha0 / sqrt(n)`.
    pub iteration: u64,
}

impl DualState {
    pub fn new(len: usize, alpha0: f64) -> Self {
        DualState { lambdas: vec![0.0; len], alpha0, iteration: 1 }
    }

    pub fn step(&self) -> f64 {
        self.alpha0 / libm::sqrt(self.iteration as f64)
    }
}

/// Deadline minimizing `y + Σ λ_i κ(ηιD_i)³ / y²`, clipped to the CPU bound.
pub fn solve_sub_y(glds: &[GldProfile], lambdas: &[f64], sys: &SystemParams) -> f64 {
    sub_y_root(glds, lambdas, sys).max(y_lower_bound(glds, sys))
}

/// Unconstrained stationary point of the deadline subproblem.
pub fn sub_y_root(glds: &[GldProfile], lambdas: &[f64], sys: &SystemParams) -> f64 {
    let weighted: f64 = glds
        .iter()
        .zip(lambdas)
        .map(|(g, &l)| {
            let c = g.cycles(sys);
            l * sys.switch_cap * c * c * c
        })
        .sum();
    libm::cbrt(2.0 * weighted)
}

/// Derivative of `t + Σ λ_i p_i(t) t` with respect to `t`.
pub fn sub_t_derivative(glds: &[GldProfile], lambdas: &[f64], t: f64, sys: &SystemParams) -> f64 {
    let x = sys.model_bits / (sys.bandwidth * t);
    let a = x * core::f64::consts::LN_2;
    let e = libm::expm1(a);
    let base = e + 1.0;
    let mut sum = 0.0;
    for (g, &l) in glds.iter().zip(lambdas) {
        if l == 0.0 {
            continue;
        }
        let k = g.index.saturating_sub(1);
        let m = f64::from(k);
        let interference = if k <= 16 { (0..k).fold(1.0, |acc, _| acc * base) } else { libm::pow(base, m) };
        let bracket = (e - a) - a * e - e * m * a;
        sum += l * sys.noise_coord / g.gain_coord * interference * bracket;
    }
    1.0 + sum
}

/// Upload time minimizing `t + Σ λ_i p_i(t) t` over `t ≥ t_lb`.
pub fn solve_sub_t(glds: &[GldProfile], lambdas: &[f64], sys: &SystemParams, cfg: &SolverConfig) -> Result<f64> {
    sub_t_from(glds, lambdas, sys, cfg, t_up_g_lower_bound(glds, sys))
}

fn sub_t_from(glds: &[GldProfile], lambdas: &[f64], sys: &SystemParams, cfg: &SolverConfig, t_lb: f64) -> Result<f64> {
    let d = |t: f64| sub_t_derivative(glds, lambdas, t, sys);
    if t_lb <= 0.0 || d(t_lb) >= 0.0 {
        return Ok(t_lb);
    }
    let (mut lo, mut hi) = (t_lb, t_lb);
    let mut doublings = 0;
    while d(hi) < 0.0 {
        if doublings == cfg.bisection_max_iters {
            return Err(Error::Solver(format!(
                "upload-time bracket not found after {doublings} doublings from {t_lb:e} s"
            )));
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
    }
    for _ in 0..cfg.bisection_max_iters {
        if hi - lo <= cfg.bisection_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if d(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of the threshold walk over GLDs ordered by jamming price.
#[derive(Debug, Clone, PartialEq)]
pub struct JammingAllocation {
    pub q: Vec<f64>,
    /// Position (into the GLD slice) of the fractional assignment, if any.
    pub pivot: Option<usize>,
}

/// Positions of `glds` sorted by price `λ_i t_B / g_iE`, most expensive
/// first, ties by ascending GLD index.
pub fn price_order(glds: &[GldProfile], lambdas: &[f64], t_hat_b: f64) -> Vec<usize> {
    let price: Vec<f64> = glds.iter().zip(lambdas).map(|(g, &l)| l * t_hat_b / g.gain_eaves).collect();
    let mut order: Vec<usize> = (0..glds.len()).collect();
    order.sort_by(|&a, &b| price[b].total_cmp(&price[a]).then(glds[a].index.cmp(&glds[b].index)));
    order
}

/// Cheapest jamming that delivers exactly `q_agg` at the eavesdropper.
pub fn solve_sub_q(glds: &[GldProfile], lambdas: &[f64], t_hat_b: f64, q_agg: f64) -> Result<Vec<f64>> {
    Ok(allocate_jamming(glds, lambdas, t_hat_b, q_agg, None)?.q)
}

/// Threshold walk from the cheapest end of [`price_order`].
///
/// With `headroom`, GLDs in the tie group that holds the pivot are first
/// loaded up to their remaining energy headroom (in W) and only then up to
/// their caps. Every such split has the same Lagrangian cost; picking the
/// one that respects energy keeps the subgradient honest when several
/// multipliers sit at zero.
pub fn allocate_jamming(
    glds: &[GldProfile],
    lambdas: &[f64],
    t_hat_b: f64,
    q_agg: f64,
    headroom: Option<&[f64]>,
) -> Result<JammingAllocation> {
    if !(q_agg >= 0.0) {
        return Err(Error::Domain("aggregate jamming must be nonnegative"));
    }
    let ub = q_upper_bound(glds);
    if q_agg > ub * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("jamming target {q_agg:e} W exceeds the deliverable {ub:e} W")));
    }
    let price: Vec<f64> = glds.iter().zip(lambdas).map(|(g, &l)| l * t_hat_b / g.gain_eaves).collect();
    let order = price_order(glds, lambdas, t_hat_b);
    let mut q = vec![0.0; glds.len()];
    let mut rest = q_agg;
    let mut pivot = None;
    let mut end = order.len();
    while end > 0 && rest > 0.0 {
        let mut start = end - 1;
        while start > 0 && price[order[start - 1]] == price[order[end - 1]] {
            start -= 1;
        }
        let group: Vec<usize> = order[start..end].iter().rev().copied().collect();
        let capacity: f64 = group.iter().map(|&k| glds[k].jam_power_max * glds[k].gain_eaves).sum();
        if capacity <= rest {
            for &k in &group {
                q[k] = glds[k].jam_power_max;
            }
            rest -= capacity;
        } else {
            if let Some(room) = headroom {
                for &k in &group {
                    let soft = glds[k].jam_power_max.min(room[k].max(0.0));
                    fill(&mut q, &mut rest, &mut pivot, k, soft, glds[k].gain_eaves);
                    if rest <= 0.0 {
                        break;
                    }
                }
            }
            for &k in &group {
                if rest <= 0.0 {
                    break;
                }
                fill(&mut q, &mut rest, &mut pivot, k, glds[k].jam_power_max, glds[k].gain_eaves);
            }
            rest = 0.0;
        }
        end = start;
    }
    Ok(JammingAllocation { q, pivot })
}

/// Raises `q[k]` toward `limit` while `rest` remains.
fn fill(q: &mut [f64], rest: &mut f64, pivot: &mut Option<usize>, k: usize, limit: f64, gain: f64) {
    let room = (limit - q[k]).max(0.0) * gain;
    if room <= 0.0 {
        return;
    }
    if room < *rest {
        q[k] = limit;
        *rest -= room;
    } else {
        q[k] += *rest / gain;
        *rest = 0.0;
        *pivot = Some(k);
    }
}

/// Energy used by each GLD beyond its budget at `(y, t, q)`. Negative
/// entries are slack.
pub fn energy_excess(
    glds: &[GldProfile],
    y: f64,
    t_up_g: f64,
    q: &[f64],
    t_hat_b: f64,
    sys: &SystemParams,
) -> Vec<f64> {
    glds.iter()
        .zip(q)
        .map(|(g, &qi)| {
            local_energy_for_deadline(g, y, sys) + upload_energy_unchecked(g, t_up_g, sys) + t_hat_b * qi - g.energy_max
        })
        .collect()
}

/// One projected subgradient step on the energy multipliers.
pub fn dual_update(
    state: &DualState,
    glds: &[GldProfile],
    y: f64,
    t_up_g: f64,
    q: &[f64],
    t_hat_b: f64,
    sys: &SystemParams,
) -> DualState {
    let grad = energy_excess(glds, y, t_up_g, q, t_hat_b, sys);
    step_with(state, &grad)
}

/// Projected step along a given subgradient.
pub fn step_with(state: &DualState, subgradient: &[f64]) -> DualState {
    let alpha = state.step();
    let lambdas = state.lambdas.iter().zip(subgradient).map(|(&l, &g)| (l + alpha * g).max(0.0)).collect();
    DualState { lambdas, alpha0: state.alpha0, iteration: state.iteration + 1 }
}

/// Everything [`solve_pgld`] learns at one jamming level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgldOutcome {
    pub solution: Solution,
    pub dual: DualState,
    /// `y + t_up_g + t_agg + t_up`.
    pub objective: f64,
    /// Best Lagrangian dual value seen, a lower bound on `objective`.
    pub lower_bound: f64,
    /// `(objective - lower_bound) / objective`.
    pub gap: f64,
    /// Largest multiplier change in the last iteration.
    pub residual: f64,
    pub iterations: usize,
    /// True when the residual fell below the tolerance.
    pub converged: bool,
    /// Multipliers after each iteration, when requested.
    pub trace: Vec<Vec<f64>>,
}

/// Solves the GLD subproblem at a fixed aggregate jamming level.
pub fn solve_pgld(
    glds: &[GldProfile],
    blds: &[BldProfile],
    q_agg: f64,
    sys: &SystemParams,
    cfg: &SolverConfig,
) -> Result<PgldOutcome> {
    pgld(glds, blds, q_agg, sys, cfg, false)
}

/// As [`solve_pgld`], also recording the multiplier trajectory.
pub fn solve_pgld_traced(
    glds: &[GldProfile],
    blds: &[BldProfile],
    q_agg: f64,
    sys: &SystemParams,
    cfg: &SolverConfig,
) -> Result<PgldOutcome> {
    pgld(glds, blds, q_agg, sys, cfg, true)
}

fn pgld(
    glds: &[GldProfile],
    blds: &[BldProfile],
    q_agg: f64,
    sys: &SystemParams,
    cfg: &SolverConfig,
    record: bool,
) -> Result<PgldOutcome> {
    if glds.is_empty() {
        return Err(Error::Validation("at least one GLD is required".into()));
    }
    if !(q_agg > 0.0) {
        return Err(Error::Domain("aggregate jamming must be positive"));
    }
    let ub = q_upper_bound(glds);
    if q_agg > ub * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("jamming target {q_agg:e} W exceeds the deliverable {ub:e} W")));
    }
    let t_b = min_bld_upload_time(blds, q_agg, sys)?;
    let ctx = Frontier::new(glds, sys, q_agg, t_b);
    if !ctx.feasible(ctx.y_far(), ctx.t_far()) {
        return Err(Error::Infeasible(format!(
            "energy budgets cannot cover jamming target {q_agg:e} W for any deadline"
        )));
    }
    let fixed = sys.t_agg + sys.t_up;

    let mut state = DualState::new(glds.len(), cfg.alpha0_for(glds));
    let mut trace = Vec::new();
    let mut best_dual = f64::NEG_INFINITY;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let y = solve_sub_y(glds, &state.lambdas, sys);
        let t = sub_t_from(glds, &state.lambdas, sys, cfg, ctx.t_lb)?;
        let room = ctx.headroom(y, t);
        let alloc = allocate_jamming(glds, &state.lambdas, t_b, q_agg, Some(&room))?;
        let excess = energy_excess(glds, y, t, &alloc.q, t_b, sys);
        let dual_value = y + t + fixed + state.lambdas.iter().zip(&excess).map(|(l, g)| l * g).sum::<f64>();
        best_dual = best_dual.max(dual_value);
        let next = step_with(&state, &excess);
        let residual = next.lambdas.iter().zip(&state.lambdas).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max);
        state = next;
        if record {
            trace.push(state.lambdas.clone());
        }
        let converged = residual < cfg.dual_tol;
        if !converged && iterations < cfg.max_dual_iters {
            continue;
        }
        let (y, t) = ctx.recover(glds, &state.lambdas, sys, cfg)?;
        let objective = y + t + fixed;
        let gap = ((objective - best_dual) / objective).max(0.0);
        if gap <= cfg.gap_tol {
            let solution = ctx.assemble(glds, blds, &state.lambdas, y, t, sys)?;
            return Ok(PgldOutcome {
                solution,
                dual: state,
                objective,
                lower_bound: best_dual,
                gap,
                residual,
                iterations,
                converged,
                trace,
            });
        }
        if iterations >= cfg.max_dual_iters {
            return Err(Error::DualNotConverged { iterations, residual, gap });
        }
    }
}

/// Primal feasibility of `(y, t)` at fixed `Q` and the recovery of a
/// feasible point from a dual iterate.
struct Frontier<'a> {
    glds: &'a [GldProfile],
    sys: &'a SystemParams,
    q_agg: f64,
    t_b: f64,
    y_lb: f64,
    t_lb: f64,
}

impl<'a> Frontier<'a> {
    fn new(glds: &'a [GldProfile], sys: &'a SystemParams, q_agg: f64, t_b: f64) -> Self {
        Frontier { glds, sys, q_agg, t_b, y_lb: y_lower_bound(glds, sys), t_lb: t_up_g_lower_bound(glds, sys) }
    }

    fn y_far(&self) -> f64 {
        self.y_lb.max(1e-3) * 1e6
    }

    fn t_far(&self) -> f64 {
        self.t_lb.max(1e-3) * 1e6
    }

    /// Jamming power each GLD can still afford at `(y, t)`.
    fn headroom(&self, y: f64, t: f64) -> Vec<f64> {
        self.glds
            .iter()
            .map(|g| {
                let left =
                    g.energy_max - local_energy_for_deadline(g, y, self.sys) - upload_energy_unchecked(g, t, self.sys);
                if self.t_b > 0.0 {
                    left / self.t_b
                } else if left >= 0.0 {
                    f64::INFINITY
                } else {
                    -1.0
                }
            })
            .collect()
    }

    fn feasible(&self, y: f64, t: f64) -> bool {
        let room = self.headroom(y, t);
        if room.iter().any(|&c| c < 0.0) {
            return false;
        }
        let deliverable: f64 = self.glds.iter().zip(&room).map(|(g, &c)| g.gain_eaves * g.jam_power_max.min(c)).sum();
        deliverable >= self.q_agg * (1.0 - 1e-12)
    }

    /// Smallest feasible value of a coordinate on `[lo, far]`, where
    /// feasibility is monotone in that coordinate.
    fn smallest(&self, lo: f64, far: f64, ok: impl Fn(f64) -> bool, cfg: &SolverConfig) -> Option<f64> {
        if !ok(far) {
            return None;
        }
        if ok(lo) {
            return Some(lo);
        }
        let (mut a, mut b) = (lo, lo.max(1e-9));
        while !ok(b) {
            a = b;
            b = (b * 2.0).min(far);
        }
        for _ in 0..cfg.bisection_max_iters {
            let mid = 0.5 * (a + b);
            if b - a <= cfg.bisection_tol * b.max(1.0) || mid <= a || mid >= b {
                break;
            }
            if ok(mid) {
                b = mid;
            } else {
                a = mid;
            }
        }
        Some(b)
    }

    fn t_min(&self, y: f64, cfg: &SolverConfig) -> Option<f64> {
        self.smallest(self.t_lb, self.t_far(), |t| self.feasible(y, t), cfg)
    }

    fn y_min(&self, t: f64, cfg: &SolverConfig) -> Option<f64> {
        self.smallest(self.y_lb, self.y_far(), |y| self.feasible(y, t), cfg)
    }

    /// Feasible `(y, t)` near the dual iterate: hold one coordinate at its
    /// dual value and push the other to the feasibility frontier.
    fn recover(
        &self,
        glds: &[GldProfile],
        lambdas: &[f64],
        sys: &SystemParams,
        cfg: &SolverConfig,
    ) -> Result<(f64, f64)> {
        let y_d = solve_sub_y(glds, lambdas, sys);
        let t_d = sub_t_from(glds, lambdas, sys, cfg, self.t_lb)?;
        let mut best: Option<(f64, f64)> = None;
        let mut offer = |y: f64, t: f64| {
            if best.is_none_or(|(by, bt)| y + t < by + bt) {
                best = Some((y, t));
            }
        };
        if let Some(t) = self.t_min(y_d, cfg) {
            offer(y_d, t);
        }
        if let Some(y) = self.y_min(t_d, cfg) {
            offer(y, t_d);
        }
        // Fall-backs for iterates on the wrong side of both asymptotes.
        if let Some(y_edge) = self.y_min(self.t_far(), cfg) {
            let y = y_d.max(y_edge);
            if let Some(t) = self.t_min(y, cfg) {
                offer(y, t);
            }
        }
        if let Some(t_edge) = self.t_min(self.y_far(), cfg) {
            let t = t_d.max(t_edge);
            if let Some(y) = self.y_min(t, cfg) {
                offer(y, t);
            }
        }
        best.ok_or_else(|| Error::Infeasible(format!("no feasible deadline pair at Q = {:e} W", self.q_agg)))
    }

    /// Builds the reported solution, with jamming drawn only from energy
    /// headroom in price order.
    fn assemble(
        &self,
        glds: &[GldProfile],
        blds: &[BldProfile],
        lambdas: &[f64],
        y: f64,
        t: f64,
        sys: &SystemParams,
    ) -> Result<Solution> {
        let room = self.headroom(y, t);
        let order = price_order(glds, lambdas, self.t_b);
        let mut q = vec![0.0; glds.len()];
        let mut rest = self.q_agg;
        let mut pivot = None;
        for &k in order.iter().rev() {
            if rest <= 0.0 {
                break;
            }
            let cap = glds[k].jam_power_max.min(room[k].max(0.0));
            fill(&mut q, &mut rest, &mut pivot, k, cap, glds[k].gain_eaves);
        }
        if rest > self.q_agg * 1e-9 {
            return Err(Error::Infeasible(format!("recovered point cannot deliver Q = {:e} W", self.q_agg)));
        }
        let excess = energy_excess(glds, y, t, &q, self.t_b, sys);
        for (g, e) in glds.iter().zip(&excess) {
            if *e > 1e-6 * g.energy_max {
                return Err(Error::Infeasible(format!("GLD {} exceeds its energy budget by {e:e} J", g.index)));
            }
        }
        let t_gld = y + t;
        let t_bld = self.t_b + dt_training_latency(blds, sys);
        Ok(Solution {
            y,
            t_up_g: t,
            t_up_b: self.t_b,
            q_agg: self.q_agg,
            cpu_rates: glds.iter().map(|g| g.cycles(sys) / y).collect(),
            tx_powers: glds.iter().map(|g| power_unchecked(g, t, sys)).collect(),
            q,
            t_gld,
            t_bld,
            t_total: total_delay(t_gld, t_bld, sys),
        })
    }
}

/// One point of the outer search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub q_agg: f64,
    pub t_hat_b: f64,
    pub t_gld: f64,
    pub t_bld: f64,
    pub t_total: f64,
}

/// Result of the outer search over the jamming level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemOutcome {
    /// Minimum-delay solution.
    pub solution: Solution,
    /// Inner solve at the selected jamming level.
    pub best: PgldOutcome,
    /// Feasible grid points in increasing `Q`.
    pub sweep: Vec<SweepPoint>,
    /// Grid points where the inner problem had no feasible point.
    pub infeasible: Vec<f64>,
    /// Grid points skipped because the dual loop could not certify its
    /// recovered primal within the iteration cap.
    pub uncertified: Vec<Uncertified>,
    pub q_step: f64,
}

/// A grid point whose duality gap stayed above tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uncertified {
    pub q_agg: f64,
    pub residual: f64,
    pub gap: f64,
}

/// Grid of jamming levels searched by [`solve_p`].
pub fn q_grid(
    glds: &[GldProfile],
    blds: &[BldProfile],
    sys: &SystemParams,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64)> {
    let lo = q_lower_bound(blds, sys).max(0.0);
    let hi = q_upper_bound(glds);
    if !(hi > lo) {
        return Err(Error::Infeasible(format!(
            "deliverable jamming {hi:e} W does not exceed the secrecy threshold {lo:e} W"
        )));
    }
    let step = cfg.q_step.unwrap_or((hi - lo) / 200.0);
    let mut grid = Vec::new();
    let mut k = 1u64;
    loop {
        let q = lo + k as f64 * step;
        if q > hi * (1.0 + 1e-12) {
            break;
        }
        grid.push(q.min(hi));
        k += 1;
    }
    Ok((grid, step))
}

/// Minimizes the end-to-end delay by a linear search over the aggregate
/// jamming level.
pub fn solve_p(
    glds: &[GldProfile],
    blds: &[BldProfile],
    sys: &SystemParams,
    cfg: &SolverConfig,
) -> Result<ProblemOutcome> {
    if glds.is_empty() || blds.is_empty() {
        return Err(Error::Validation("both the GLD and the BLD sets must be nonempty".into()));
    }
    cfg.validate()?;
    let (grid, q_step) = q_grid(glds, blds, sys, cfg)?;
    let mut sweep = Vec::new();
    let mut infeasible = Vec::new();
    let mut uncertified = Vec::new();
    let mut best: Option<PgldOutcome> = None;
    for &q in &grid {
        match solve_pgld(glds, blds, q, sys, cfg) {
            Ok(out) => {
                let s = &out.solution;
                sweep.push(SweepPoint {
                    q_agg: q,
                    t_hat_b: s.t_up_b,
                    t_gld: s.t_gld,
                    t_bld: s.t_bld,
                    t_total: s.t_total,
                });
                if best.as_ref().is_none_or(|b| s.t_total < b.solution.t_total) {
                    best = Some(out);
                }
            }
            Err(e) if e.is_infeasible() => infeasible.push(q),
            Err(Error::DualNotConverged { residual, gap, .. }) => {
                uncertified.push(Uncertified { q_agg: q, residual, gap })
            }
            Err(e) => return Err(e),
        }
    }
    let best = best.ok_or_else(|| match uncertified.first() {
        Some(u) => Error::DualNotConverged { iterations: cfg.max_dual_iters, residual: u.residual, gap: u.gap },
        None => Error::Infeasible("every jamming level on the search grid is infeasible".into()),
    })?;
    Ok(ProblemOutcome { solution: best.solution.clone(), best, sweep, infeasible, uncertified, q_step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn two_glds() -> Vec<GldProfile> {
        let mut g = instances::reference_glds();
        g.truncate(2);
        g[0].gain_eaves = 1.0;
        g[1].gain_eaves = 2.0;
        g[0].jam_power_max = 1.0;
        g[1].jam_power_max = 1.0;
        g
    }

    #[test]
    fn sub_y_examples() {
        let mut sys = instances::reference_system();
        sys.local_iters = 1;
        sys.cycles_per_bit = 1.0;
        let g = GldProfile { data_bits: 6e9, cpu_max: 1e9, ..instances::reference_glds()[0].clone() };
        let root = sub_y_root(core::slice::from_ref(&g), &[1.0], &sys);
        assert!(libm::fabs(root - libm::cbrt(43.2)) < 1e-12);
        assert!(libm::fabs(root / 3.507 - 1.0) < 1e-3);
        assert_eq!(solve_sub_y(core::slice::from_ref(&g), &[1.0], &sys), 6.0);
        let inst = instances::reference();
        assert_eq!(solve_sub_y(&inst.glds, &[0.0; 6], &inst.sys), y_lower_bound(&inst.glds, &inst.sys));
        let lam = [0.3, 0.1, 0.0, 0.7, 0.2, 0.5];
        let lam8: Vec<f64> = lam.iter().map(|l| l * 8.0).collect();
        let r1 = sub_y_root(&inst.glds, &lam, &inst.sys);
        let r8 = sub_y_root(&inst.glds, &lam8, &inst.sys);
        assert!(libm::fabs(r8 / r1 - 2.0) < 1e-12);
    }

    #[test]
    fn sub_t_examples() {
        let inst = instances::reference();
        let cfg = SolverConfig::default();
        let t_lb = t_up_g_lower_bound(&inst.glds, &inst.sys);
        assert_eq!(solve_sub_t(&inst.glds, &[0.0; 6], &inst.sys, &cfg).unwrap(), t_lb);
        for lam in [[1.0; 6], [3.0, 0.0, 5.0, 2.0, 0.5, 8.0], [40.0; 6]] {
            let t = solve_sub_t(&inst.glds, &lam, &inst.sys, &cfg).unwrap();
            let d = sub_t_derivative(&inst.glds, &lam, t, &inst.sys);
            assert!(libm::fabs(d) <= 1e-6 || (t == t_lb && d > 0.0), "t={t} d={d}");
            let lam2: Vec<f64> = lam.iter().map(|l| 2.0 * l).collect();
            let t2 = solve_sub_t(&inst.glds, &lam2, &inst.sys, &cfg).unwrap();
            assert!(t2 >= t);
        }
    }

    #[test]
    fn sub_t_bracket_failure_is_reported() {
        let inst = instances::reference();
        let cfg = SolverConfig { bisection_max_iters: 1, ..SolverConfig::default() };
        let err = solve_sub_t(&inst.glds, &[1e6; 6], &inst.sys, &cfg).unwrap_err();
        assert!(matches!(err, Error::Solver(_)));
    }

    #[test]
    fn sub_q_two_gld_example() {
        let g = two_glds();
        let a = allocate_jamming(&g, &[1.0, 1.0], 1.0, 2.5, None).unwrap();
        assert_eq!(a.q, vec![0.5, 1.0]);
        assert_eq!(a.pivot, Some(0));
        // The other pivot would need q_2 = 1.25 > Q_2^max.
        assert!(2.5 / 2.0 > g[1].jam_power_max);
    }

    #[test]
    fn sub_q_saturation_and_small_target() {
        let inst = instances::reference();
        let lam = [0.4, 0.9, 0.1, 0.3, 0.7, 0.2];
        let ub = q_upper_bound(&inst.glds);
        let q = solve_sub_q(&inst.glds, &lam, 0.5, ub).unwrap();
        for (qi, g) in q.iter().zip(&inst.glds) {
            assert_eq!(*qi, g.jam_power_max);
        }
        let tiny = solve_sub_q(&inst.glds, &lam, 0.5, 1e-15).unwrap();
        let order = price_order(&inst.glds, &lam, 0.5);
        let cheapest = *order.last().unwrap();
        for (k, qi) in tiny.iter().enumerate() {
            if k == cheapest {
                assert!(*qi > 0.0);
            } else {
                assert_eq!(*qi, 0.0);
            }
        }
        assert!(matches!(solve_sub_q(&inst.glds, &lam, 0.5, ub * 1.01), Err(Error::Infeasible(_))));
    }

    #[test]
    fn headroom_only_reshuffles_ties() {
        let g = two_glds();
        // Equal prices: energy headroom decides who jams.
        let plain = allocate_jamming(&g, &[0.0, 0.0], 1.0, 1.0, None).unwrap();
        let aware = allocate_jamming(&g, &[0.0, 0.0], 1.0, 1.0, Some(&[1.0, 0.0])).unwrap();
        assert_eq!(plain.q, vec![0.0, 0.5]);
        assert_eq!(aware.q, vec![1.0, 0.0]);
        // Distinct prices: headroom is ignored.
        let priced = allocate_jamming(&g, &[1.0, 3.0], 1.0, 1.0, Some(&[1.0, 0.0])).unwrap();
        assert_eq!(priced.q, allocate_jamming(&g, &[1.0, 3.0], 1.0, 1.0, None).unwrap().q);
    }

    #[test]
    fn dual_update_examples() {
        let s = DualState { lambdas: vec![0.5], alpha0: 0.1, iteration: 4 };
        assert!(libm::fabs(s.step() - 0.05) < 1e-15);
        let n = step_with(&s, &[2.0]);
        assert!(libm::fabs(n.lambdas[0] - 0.6) < 1e-12);
        assert_eq!(n.iteration, 5);
        let s = DualState { lambdas: vec![0.1], alpha0: 0.1, iteration: 4 };
        assert_eq!(step_with(&s, &[-4.0]).lambdas, vec![0.0]);
        assert_eq!(step_with(&s, &[0.0]).lambdas, vec![0.1]);
    }

    #[test]
    fn dual_update_uses_energy_excess() {
        let inst = instances::reference();
        let s = DualState::new(6, 0.25);
        let q = [0.0; 6];
        let n = dual_update(&s, &inst.glds, 7.5, 2.0, &q, 0.5, &inst.sys);
        let g = energy_excess(&inst.glds, 7.5, 2.0, &q, 0.5, &inst.sys);
        for (l, e) in n.lambdas.iter().zip(&g) {
            assert_eq!(*l, (0.25 * e).max(0.0));
        }
    }

    #[test]
    fn slack_budgets_reach_the_bounds() {
        let mut inst = instances::reference();
        for g in &mut inst.glds {
            g.energy_max = 1e9;
        }
        let out = solve_pgld(&inst.glds, &inst.blds, 3e-8, &inst.sys, &SolverConfig::default()).unwrap();
        assert!(out.dual.lambdas.iter().all(|&l| l == 0.0));
        assert_eq!(out.solution.y, y_lower_bound(&inst.glds, &inst.sys));
        assert_eq!(out.solution.t_up_g, t_up_g_lower_bound(&inst.glds, &inst.sys));
        assert!(out.converged);
    }

    #[test]
    fn complementary_slackness_when_converged() {
        let inst = instances::reference();
        let cfg = SolverConfig::default();
        let out = solve_pgld(&inst.glds, &inst.blds, 3e-8, &inst.sys, &cfg).unwrap();
        assert!(out.converged);
        let s = &out.solution;
        let excess = energy_excess(&inst.glds, s.y, s.t_up_g, &s.q, s.t_up_b, &inst.sys);
        for ((l, e), g) in out.dual.lambdas.iter().zip(&excess).zip(&inst.glds) {
            assert!(l * libm::fabs(*e) <= 1e-3 * g.energy_max);
        }
    }

    #[test]
    fn out_of_range_targets_are_rejected() {
        let inst = instances::reference();
        let cfg = SolverConfig::default();
        assert!(solve_pgld(&inst.glds, &inst.blds, 0.0, &inst.sys, &cfg).is_err());
        let err = solve_pgld(&inst.glds, &inst.blds, 3e-7, &inst.sys, &cfg).unwrap_err();
        assert!(err.is_infeasible());
        let below = q_lower_bound(&inst.blds, &inst.sys) * 0.5;
        assert!(solve_pgld(&inst.glds, &inst.blds, below, &inst.sys, &cfg).unwrap_err().is_infeasible());
    }

    #[test]
    fn grid_covers_the_interval() {
        let inst = instances::reference();
        let (grid, step) = q_grid(&inst.glds, &inst.blds, &inst.sys, &SolverConfig::default()).unwrap();
        assert_eq!(grid.len(), 200);
        let lo = q_lower_bound(&inst.blds, &inst.sys).max(0.0);
        assert!(libm::fabs(grid[0] - (lo + step)) < 1e-20);
        assert_eq!(*grid.last().unwrap(), q_upper_bound(&inst.glds));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { q_step: Some(0.0), ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig { max_dual_iters: 0, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig { dual_tol: -1.0, ..SolverConfig::default() }.validate().is_err());
    }
}
