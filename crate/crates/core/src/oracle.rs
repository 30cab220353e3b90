//! Brute-force and numerical cross-checks for the optimizer.
//!
//! The grid oracle shares no code path with the dual solver beyond the
//! model formulas: for fixed `(y, t, Q)` the jamming system is feasible iff
//! every GLD has nonnegative energy headroom and the capped headrooms can
//! deliver `Q`, so only `(y, t)` has to be enumerated.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ln_upload_energy, local_energy_for_deadline, min_bld_upload_time, q_lower_bound, q_upper_bound, t_up_g_lower_bound,
    upload_energy_unchecked, y_lower_bound, BldProfile, GldProfile, SystemParams,
};
use crate::optimizer::{allocate_jamming, solve_pgld, SolverConfig};

/// Rectangular `(y, t_up_g)` grid, both axes uniformly spaced and inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub y_points: usize,
    pub t_points: usize,
    pub y_range: (f64, f64),
    pub t_range: (f64, f64),
}

impl GridSpec {
    /// Square grid from the deadline and upload-time lower bounds up to
    /// `factor` times each bound.
    pub fn from_bounds(glds: &[GldProfile], sys: &SystemParams, points: usize, factor: f64) -> Self {
        let y_lb = y_lower_bound(glds, sys);
        let t_lb = t_up_g_lower_bound(glds, sys);
        GridSpec { y_points: points, t_points: points, y_range: (y_lb, factor * y_lb), t_range: (t_lb, factor * t_lb) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.y_points < 2 || self.t_points < 2 {
            return Err(Error::Validation("grid needs at least two points per axis".into()));
        }
        for (lo, hi) in [self.y_range, self.t_range] {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(Error::Validation(format!("bad grid range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn y_step(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / (self.y_points - 1) as f64
    }

    pub fn t_step(&self) -> f64 {
        (self.t_range.1 - self.t_range.0) / (self.t_points - 1) as f64
    }

    fn y_at(&self, k: usize) -> f64 {
        if k + 1 == self.y_points {
            self.y_range.1
        } else {
            self.y_range.0 + k as f64 * self.y_step()
        }
    }

    fn t_at(&self, k: usize) -> f64 {
        if k + 1 == self.t_points {
            self.t_range.1
        } else {
            self.t_range.0 + k as f64 * self.t_step()
        }
    }

    /// Objective change across one grid cell.
    pub fn cell_increment(&self) -> f64 {
        self.y_step() + self.t_step()
    }
}

/// Best feasible grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// `y + t + t_agg + t_up`.
    pub objective: f64,
    pub y: f64,
    pub t_up_g: f64,
    pub feasible_cells: usize,
    /// The grid actually searched, after any widening.
    pub grid: GridSpec,
}

/// Closed-form feasibility of the jamming system at `(y, t)`.
pub fn cell_feasible(glds: &[GldProfile], y: f64, t: f64, q_agg: f64, t_hat_b: f64, sys: &SystemParams) -> bool {
    let mut deliverable = 0.0;
    for g in glds {
        let left = g.energy_max - local_energy_for_deadline(g, y, sys) - upload_energy_unchecked(g, t, sys);
        let cap = if t_hat_b > 0.0 {
            g.jam_power_max.min(left / t_hat_b)
        } else if left >= 0.0 {
            g.jam_power_max
        } else {
            -1.0
        };
        if !(cap >= 0.0) {
            return false;
        }
        deliverable += g.gain_eaves * cap;
    }
    deliverable >= q_agg
}

/// Exhaustive search of `grid` for the smallest feasible `y + t`.
pub fn grid_oracle_pgld(
    glds: &[GldProfile],
    blds: &[BldProfile],
    q_agg: f64,
    sys: &SystemParams,
    grid: &GridSpec,
) -> Result<OracleResult> {
    grid.validate()?;
    let t_b = min_bld_upload_time(blds, q_agg, sys)?;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut feasible_cells = 0;
    for a in 0..grid.y_points {
        let y = grid.y_at(a);
        for b in 0..grid.t_points {
            let t = grid.t_at(b);
            if !cell_feasible(glds, y, t, q_agg, t_b, sys) {
                continue;
            }
            feasible_cells += 1;
            if best.is_none_or(|(v, _, _)| y + t < v) {
                best = Some((y + t, y, t));
            }
        }
    }
    let (v, y, t) = best.ok_or_else(|| Error::Infeasible(format!("no feasible grid point at Q = {q_agg:e} W")))?;
    Ok(OracleResult { objective: v + sys.t_agg + sys.t_up, y, t_up_g: t, feasible_cells, grid: grid.clone() })
}

/// Grid oracle on a square grid anchored at the lower bounds, doubling the
/// upper ranges while the minimum sits on the far edge or nothing is
/// feasible.
pub fn grid_oracle_auto(
    glds: &[GldProfile],
    blds: &[BldProfile],
    q_agg: f64,
    sys: &SystemParams,
    points: usize,
    factor: f64,
) -> Result<OracleResult> {
    const WIDENINGS: usize = 10;
    let mut grid = GridSpec::from_bounds(glds, sys, points, factor);
    for round in 0..=WIDENINGS {
        let last = round == WIDENINGS;
        match grid_oracle_pgld(glds, blds, q_agg, sys, &grid) {
            Ok(r) => {
                let on_edge = r.y >= grid.y_range.1 || r.t_up_g >= grid.t_range.1;
                if !on_edge || last {
                    return Ok(r);
                }
            }
            Err(Error::Infeasible(msg)) if last => return Err(Error::Infeasible(msg)),
            Err(Error::Infeasible(_)) => {}
            Err(e) => return Err(e),
        }
        let (y0, y1) = grid.y_range;
        let (t0, t1) = grid.t_range;
        grid.y_range = (y0, y0 + 2.0 * (y1 - y0));
        grid.t_range = (t0, t0 + 2.0 * (t1 - t0));
    }
    unreachable!("the last widening round always returns")
}

/// Settings of [`oracle_match_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleMatchConfig {
    /// Number of jamming levels to compare.
    pub q_values: usize,
    /// Grid points per axis.
    pub points: usize,
    /// Initial grid reach, as a multiple of each lower bound.
    pub factor: f64,
    /// Largest accepted relative objective difference.
    pub tolerance: f64,
    /// Multiplies the solver's deadline before comparing. Fault injection
    /// for exercising the probe; 1 in normal use.
    pub y_scale: f64,
}

impl Default for OracleMatchConfig {
    fn default() -> Self {
        OracleMatchConfig { q_values: 20, points: 400, factor: 4.0, tolerance: 2e-2, y_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMatchCase {
    pub q_agg: f64,
    /// `None` when the solver returned no certified point.
    pub solver_objective: Option<f64>,
    pub oracle_objective: f64,
    pub relative_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMatchReport {
    pub cases: Vec<OracleMatchCase>,
    /// Draws rejected because the oracle found nothing feasible.
    pub rejected: usize,
    pub worst: f64,
}

impl OracleMatchReport {
    pub fn passed(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|c| c.passed)
    }
}

/// Compares the dual solver with the grid oracle at seeded random jamming
/// levels. Levels the oracle finds infeasible are redrawn.
pub fn oracle_match_probe(
    glds: &[GldProfile],
    blds: &[BldProfile],
    sys: &SystemParams,
    solver: &SolverConfig,
    probe: &OracleMatchConfig,
    seed: u64,
) -> Result<OracleMatchReport> {
    if probe.q_values == 0 {
        return Err(Error::Validation("oracle probe needs at least one jamming level".into()));
    }
    if !(probe.tolerance > 0.0 && probe.factor > 1.0 && probe.y_scale > 0.0) {
        return Err(Error::Validation(
            "oracle probe tolerance, factor and y scale must be positive, factor above 1".into(),
        ));
    }
    let lo = q_lower_bound(blds, sys).max(0.0);
    let hi = q_upper_bound(glds);
    if !(hi > lo) {
        return Err(Error::Infeasible(format!("no jamming level in ({lo:e}, {hi:e}] W")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleMatchReport { cases: Vec::new(), rejected: 0, worst: 0.0 };
    let max_draws = 50 * probe.q_values;
    let mut draws = 0;
    while report.cases.len() < probe.q_values {
        if draws == max_draws {
            return Err(Error::Infeasible(format!(
                "only {} of {draws} random jamming levels were feasible",
                report.cases.len()
            )));
        }
        draws += 1;
        let q = lo + (hi - lo) * rng.random_range(f64::EPSILON..=1.0);
        let oracle = match grid_oracle_auto(glds, blds, q, sys, probe.points, probe.factor) {
            Ok(o) => o,
            Err(e) if e.is_infeasible() => {
                report.rejected += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let fixed = sys.t_agg + sys.t_up;
        let solver_objective = match solve_pgld(glds, blds, q, sys, solver) {
            Ok(out) => Some(out.solution.y * probe.y_scale + out.solution.t_up_g + fixed),
            Err(e) if e.is_infeasible() || matches!(e, Error::DualNotConverged { .. }) => None,
            Err(e) => return Err(e),
        };
        let relative_error =
            solver_objective.map_or(f64::INFINITY, |s| libm::fabs(s - oracle.objective) / oracle.objective);
        report.worst = report.worst.max(relative_error);
        report.cases.push(OracleMatchCase {
            q_agg: q,
            solver_objective,
            oracle_objective: oracle.objective,
            relative_error,
            passed: relative_error <= probe.tolerance,
        });
    }
    Ok(report)
}

/// Second-difference scan of one GLD's upload energy `f(t) = p(t) t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub index: u32,
    /// Probe times and `(f(t+h) - 2f(t) + f(t-h)) / (f(t) δ²)` with
    /// `h = δt`. Dividing by `f(t) > 0` keeps the sign and avoids overflow
    /// for short uploads.
    pub points: Vec<(f64, f64)>,
    /// `f` vanishes identically (empty model); excluded from the verdict.
    pub degenerate: bool,
    pub all_positive: bool,
    pub min_value: f64,
}

/// Probes curvature of the upload energy on 200 log-spaced times.
pub fn convexity_probe(gld: &GldProfile, sys: &SystemParams, t_range: (f64, f64)) -> ConvexityReport {
    const POINTS: usize = 200;
    const DELTA: f64 = 1e-3;
    let (lo, hi) = t_range;
    let degenerate = sys.model_bits == 0.0;
    let mut points = Vec::with_capacity(POINTS);
    for k in 0..POINTS {
        let t = lo * libm::pow(hi / lo, k as f64 / (POINTS - 1) as f64);
        let value = if degenerate {
            0.0
        } else {
            let h = DELTA * t;
            let mid = ln_upload_energy(gld, t, sys);
            let up = libm::expm1(ln_upload_energy(gld, t + h, sys) - mid);
            let down = libm::expm1(ln_upload_energy(gld, t - h, sys) - mid);
            (up + down) / (DELTA * DELTA)
        };
        points.push((t, value));
    }
    let min_value = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let all_positive = !degenerate && points.iter().all(|p| p.1 > 0.0);
    ConvexityReport { index: gld.index, points, degenerate, all_positive, min_value }
}

/// One random instance of the jamming allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotInstance {
    pub lambdas: Vec<f64>,
    pub gains: Vec<f64>,
    pub caps: Vec<f64>,
    pub t_hat_b: f64,
    pub q_agg: f64,
    /// Positions of every pivot that passes the bracketing test.
    pub feasible_pivots: Vec<usize>,
    /// Pivot chosen by the threshold walk.
    pub walk_pivot: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotReport {
    pub trials: usize,
    /// Instances with distinct prices that were checked.
    pub checked: usize,
    /// Instances with tied prices, skipped.
    pub degenerate: usize,
    pub counterexamples: Vec<PivotInstance>,
}

impl PivotReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Pivots `k` (positions into the GLD list) for which assigning full caps to
/// every cheaper GLD leaves a remainder within `[0, cap_k]`.
pub fn feasible_pivots(glds: &[GldProfile], lambdas: &[f64], t_hat_b: f64, q_agg: f64) -> Vec<usize> {
    let order = crate::optimizer::price_order(glds, lambdas, t_hat_b);
    let mut out = Vec::new();
    for (pos, &k) in order.iter().enumerate() {
        let cheaper: f64 = order[pos + 1..].iter().map(|&r| glds[r].jam_power_max * glds[r].gain_eaves).sum();
        let x = (q_agg - cheaper) / glds[k].gain_eaves;
        if x >= 0.0 && x <= glds[k].jam_power_max {
            out.push(k);
        }
    }
    out
}

/// Random-instance check that the threshold walk's fractional GLD is the
/// only admissible pivot.
pub fn pivot_uniqueness_probe(seed: u64, trials: usize) -> Result<PivotReport> {
    if trials == 0 {
        return Err(Error::Validation("pivot probe needs at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PivotReport { trials, checked: 0, degenerate: 0, counterexamples: Vec::new() };
    for _ in 0..trials {
        let m = rng.random_range(2..=8usize);
        let glds: Vec<GldProfile> = (0..m)
            .map(|k| GldProfile {
                index: k as u32 + 1,
                data_bits: 1.0,
                gain_coord: 1.0,
                gain_eaves: rng.random_range(0.5e-8..2.0e-8),
                cpu_max: 1.0,
                tx_power_max: 1.0,
                jam_power_max: rng.random_range(0.5..1.5),
                energy_max: 1.0,
            })
            .collect();
        let lambdas: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let t_hat_b = rng.random_range(0.1..5.0);
        let mut q_agg = 0.0;
        while q_agg == 0.0 {
            q_agg = rng.random_range(0.0..1.0) * q_upper_bound(&glds);
        }
        if has_tied_prices(&glds, &lambdas, t_hat_b) {
            report.degenerate += 1;
            continue;
        }
        report.checked += 1;
        let pivots = feasible_pivots(&glds, &lambdas, t_hat_b, q_agg);
        let walk = allocate_jamming(&glds, &lambdas, t_hat_b, q_agg, None)?.pivot;
        if pivots.len() != 1 || walk != Some(pivots[0]) {
            report.counterexamples.push(PivotInstance {
                lambdas,
                gains: glds.iter().map(|g| g.gain_eaves).collect(),
                caps: glds.iter().map(|g| g.jam_power_max).collect(),
                t_hat_b,
                q_agg,
                feasible_pivots: pivots,
                walk_pivot: walk,
            });
        }
    }
    Ok(report)
}

fn has_tied_prices(glds: &[GldProfile], lambdas: &[f64], t_hat_b: f64) -> bool {
    let price: Vec<f64> = glds.iter().zip(lambdas).map(|(g, &l)| l * t_hat_b / g.gain_eaves).collect();
    price.iter().enumerate().any(|(a, p)| price[..a].contains(p))
}
