//! Latency, energy, NOMA power and secrecy-rate formulas, and the feasibility
//! bounds derived from them.
//!
//! Everything here is a pure function of SI-unit inputs (bits, Hz, W, J, s).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants shared by every device in a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Uplink bandwidth `W` in Hz.
    pub bandwidth: f64,
    /// Noise power at the group coordinator `n_C` in W.
    pub noise_coord: f64,
    /// Noise power at the eavesdropper `n_E` in W.
    pub noise_eaves: f64,
    /// Local training passes per FL iteration `η`.
    pub local_iters: u32,
    /// CPU cycles needed per data bit `ι`.
    pub cycles_per_bit: f64,
    /// Effective switched capacitance `κ`.
    pub switch_cap: f64,
    /// Model size `L` in bits.
    pub model_bits: f64,
    /// CPU rate of the group coordinator that trains the digital twins, Hz.
    pub coord_cpu: f64,
    /// Coordinator aggregation time.
    pub t_agg: f64,
    /// Coordinator upload time to the validator.
    pub t_up: f64,
    /// Main-coordinator processing time, a small positive number.
    pub t_main: f64,
}

impl SystemParams {
    pub fn eta(&self) -> f64 {
        f64::from(self.local_iters)
    }

    /// Fixed delay added after the slower of the two device groups.
    pub fn fixed_delay(&self) -> f64 {
        self.t_agg + self.t_up + self.t_main
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("bandwidth", self.bandwidth),
            ("noise_coord", self.noise_coord),
            ("noise_eaves", self.noise_eaves),
            ("local_iters", self.eta()),
            ("cycles_per_bit", self.cycles_per_bit),
            ("switch_cap", self.switch_cap),
            ("model_bits", self.model_bits),
            ("coord_cpu", self.coord_cpu),
            ("t_agg", self.t_agg),
            ("t_up", self.t_up),
            ("t_main", self.t_main),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("system parameter {name} must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A resource-rich device that trains locally, uploads over NOMA and jams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GldProfile {
    /// 1-based decoding position; GLD `i` sees `i - 1` undecoded interferers.
    pub index: u32,
    /// Local data size in bits.
    pub data_bits: f64,
    /// Power gain to the group coordinator.
    pub gain_coord: f64,
    /// Power gain to the eavesdropper.
    pub gain_eaves: f64,
    /// Maximum CPU rate, Hz.
    pub cpu_max: f64,
    /// Maximum upload transmit power, W.
    pub tx_power_max: f64,
    /// Maximum jamming power, W.
    pub jam_power_max: f64,
    /// Energy budget per FL iteration, J.
    pub energy_max: f64,
}

impl GldProfile {
    /// Cycles needed for one FL iteration, `ηιD`.
    pub fn cycles(&self, sys: &SystemParams) -> f64 {
        sys.eta() * sys.cycles_per_bit * self.data_bits
    }

    pub fn validate(&self) -> Result<()> {
        if self.index == 0 {
            return Err(Error::Validation("GLD index is 1-based".into()));
        }
        let fields = [
            ("data_bits", self.data_bits),
            ("gain_coord", self.gain_coord),
            ("gain_eaves", self.gain_eaves),
            ("cpu_max", self.cpu_max),
            ("tx_power_max", self.tx_power_max),
            ("jam_power_max", self.jam_power_max),
            ("energy_max", self.energy_max),
        ];
        positive_fields("GLD", self.index, &fields)
    }
}

/// A resource-constrained device whose training runs on its digital twin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BldProfile {
    pub index: u32,
    /// Data uploaded to the twin each iteration, bits.
    pub data_bits: f64,
    /// Power gain to the group coordinator.
    pub gain_coord: f64,
    /// Power gain to the eavesdropper.
    pub gain_eaves: f64,
    /// Fixed transmit power, W.
    pub tx_power: f64,
    /// Receiver noise on this BLD's legitimate link, W.
    pub noise: f64,
}

impl BldProfile {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("data_bits", self.data_bits),
            ("gain_coord", self.gain_coord),
            ("gain_eaves", self.gain_eaves),
            ("tx_power", self.tx_power),
            ("noise", self.noise),
        ];
        positive_fields("BLD", self.index, &fields)
    }
}

fn positive_fields(kind: &str, index: u32, fields: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in fields {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Validation(format!("{kind} {index}: {name} must be finite and positive, got {v}")));
        }
    }
    Ok(())
}

/// Validates a whole cluster: every profile, plus unique GLD indices.
pub fn validate_cluster(sys: &SystemParams, glds: &[GldProfile], blds: &[BldProfile]) -> Result<()> {
    sys.validate()?;
    for (k, g) in glds.iter().enumerate() {
        g.validate()?;
        if glds[..k].iter().any(|o| o.index == g.index) {
            return Err(Error::Validation(format!("duplicate GLD index {}", g.index)));
        }
    }
    for (k, b) in blds.iter().enumerate() {
        b.validate()?;
        if blds[..k].iter().any(|o| o.index == b.index) {
            return Err(Error::Validation(format!("duplicate BLD index {}", b.index)));
        }
    }
    Ok(())
}

/// Optimizer output for one FL iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Local training deadline shared by all GLDs.
    pub y: f64,
    /// NOMA upload duration of the GLD group.
    pub t_up_g: f64,
    /// Upload duration of the BLD group.
    pub t_up_b: f64,
    /// Jamming power per GLD, W.
    pub q: Vec<f64>,
    /// Jamming power received at the eavesdropper, `Σ q_i g_iE`.
    pub q_agg: f64,
    /// CPU rate per GLD, `ηιD_i / y`.
    pub cpu_rates: Vec<f64>,
    /// Upload power per GLD at `t_up_g`.
    pub tx_powers: Vec<f64>,
    /// GLD branch delay `y + t_up_g`.
    pub t_gld: f64,
    /// BLD branch delay `t_up_b + t_loc_b`.
    pub t_bld: f64,
    /// End-to-end delay `max(t_gld, t_bld)` plus the fixed coordinator delays.
    pub t_total: f64,
}

/// Time for a GLD to finish its local passes at `cpu_rate`.
pub fn local_training_latency(gld: &GldProfile, cpu_rate: f64, sys: &SystemParams) -> Result<f64> {
    if !(cpu_rate > 0.0) {
        return Err(Error::Domain("CPU rate must be positive"));
    }
    Ok(gld.cycles(sys) / cpu_rate)
}

/// Dynamic CPU energy `κηιD v²` of the local passes.
pub fn local_training_energy(gld: &GldProfile, cpu_rate: f64, sys: &SystemParams) -> Result<f64> {
    if !(cpu_rate > 0.0) {
        return Err(Error::Domain("CPU rate must be positive"));
    }
    Ok(sys.switch_cap * gld.cycles(sys) * cpu_rate * cpu_rate)
}

/// Local energy when the CPU runs just fast enough to finish in `y`:
/// `κ(ηιD)³ / y²`.
pub fn local_energy_for_deadline(gld: &GldProfile, y: f64, sys: &SystemParams) -> f64 {
    let c = gld.cycles(sys);
    sys.switch_cap * c * c * c / (y * y)
}

/// Time the coordinator needs to train every digital twin in the cluster.
pub fn dt_training_latency(blds: &[BldProfile], sys: &SystemParams) -> f64 {
    let bits: f64 = blds.iter().map(|b| b.data_bits).sum();
    sys.eta() * sys.cycles_per_bit * bits / sys.coord_cpu
}

/// Spectral load `L / (W t)` of the NOMA upload.
fn spectral_load(t: f64, sys: &SystemParams) -> f64 {
    sys.model_bits / (sys.bandwidth * t)
}

/// Upload power for GLD `i` to ship the model in `t` seconds under SIC:
/// `(n_C / g_iC)(2^x - 1) 2^{(i-1)x}` with `x = L / (W t)`.
pub fn noma_power(gld: &GldProfile, t_up_g: f64, sys: &SystemParams) -> Result<f64> {
    if !(t_up_g > 0.0) {
        return Err(Error::Domain("upload time must be positive"));
    }
    Ok(power_unchecked(gld, t_up_g, sys))
}

pub(crate) fn power_unchecked(gld: &GldProfile, t: f64, sys: &SystemParams) -> f64 {
    let x = spectral_load(t, sys);
    let interferers = f64::from(gld.index.saturating_sub(1));
    sys.noise_coord / gld.gain_coord * libm::expm1(x * LN_2) * libm::exp2(interferers * x)
}

/// Upload energy `p_i(t) t`.
pub fn upload_energy(gld: &GldProfile, t_up_g: f64, sys: &SystemParams) -> Result<f64> {
    Ok(noma_power(gld, t_up_g, sys)? * t_up_g)
}

pub(crate) fn upload_energy_unchecked(gld: &GldProfile, t: f64, sys: &SystemParams) -> f64 {
    power_unchecked(gld, t, sys) * t
}

/// Natural log of the upload energy, finite even where the energy itself
/// overflows.
pub(crate) fn ln_upload_energy(gld: &GldProfile, t: f64, sys: &SystemParams) -> f64 {
    let a = spectral_load(t, sys) * LN_2;
    // ln(e^a - 1), switching form before expm1 overflows.
    let ln_excess = if a < 30.0 { libm::log(libm::expm1(a)) } else { a + libm::log1p(-libm::exp(-a)) };
    libm::log(sys.noise_coord / gld.gain_coord) + ln_excess + f64::from(gld.index.saturating_sub(1)) * a + libm::log(t)
}

/// Derivative of the upload energy with respect to `t`.
#[cfg(test)]
pub(crate) fn upload_energy_slope(gld: &GldProfile, t: f64, sys: &SystemParams) -> f64 {
    let x = spectral_load(t, sys);
    let a = x * LN_2;
    let m = f64::from(gld.index.saturating_sub(1));
    let e = libm::expm1(a);
    let bracket = (e - a) - a * e - e * m * a;
    sys.noise_coord / gld.gain_coord * libm::exp2(m * x) * bracket
}

/// Asymptote of the upload energy of a first-decoded GLD, `n_C L ln2 / (g W)`.
pub fn upload_energy_floor(gld: &GldProfile, sys: &SystemParams) -> f64 {
    sys.noise_coord * sys.model_bits * LN_2 / (gld.gain_coord * sys.bandwidth)
}

/// Secrecy rate of a BLD when the eavesdropper sees `q_agg` watts of jamming.
pub fn secrecy_rate(bld: &BldProfile, q_agg: f64, sys: &SystemParams) -> f64 {
    let legit = libm::log1p(bld.tx_power * bld.gain_coord / bld.noise);
    let eaves = libm::log1p(bld.tx_power * bld.gain_eaves / (sys.noise_eaves + q_agg));
    let r = sys.bandwidth * (legit - eaves) / LN_2;
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

/// Energy spent jamming at `q` watts for `t_up_b` seconds.
pub fn jamming_energy(q: f64, t_up_b: f64) -> f64 {
    q * t_up_b
}

/// Jamming level at which the worst BLD link stops leaking. Any `Q` above it
/// gives every BLD a positive secrecy rate. Can be negative.
pub fn q_lower_bound(blds: &[BldProfile], sys: &SystemParams) -> f64 {
    let worst = blds.iter().map(|b| b.noise * b.gain_eaves / b.gain_coord).fold(f64::NEG_INFINITY, f64::max);
    if blds.is_empty() {
        -sys.noise_eaves
    } else {
        worst - sys.noise_eaves
    }
}

/// Largest jamming level the GLDs can deliver, `Σ Q_i^max g_iE`.
pub fn q_upper_bound(glds: &[GldProfile]) -> f64 {
    glds.iter().map(|g| g.jam_power_max * g.gain_eaves).sum()
}

/// Shortest BLD upload window at jamming level `q_agg`: the slowest BLD's
/// `D_j / R_j`.
pub fn min_bld_upload_time(blds: &[BldProfile], q_agg: f64, sys: &SystemParams) -> Result<f64> {
    let mut worst = 0.0f64;
    for b in blds {
        let r = secrecy_rate(b, q_agg, sys);
        if !(r > 0.0) {
            return Err(Error::ZeroSecrecy { index: b.index, q_agg });
        }
        worst = worst.max(b.data_bits / r);
    }
    Ok(worst)
}

/// Shortest training deadline the CPU caps allow, `max_i ηιD_i / V_i`.
pub fn y_lower_bound(glds: &[GldProfile], sys: &SystemParams) -> f64 {
    glds.iter().map(|g| g.cycles(sys) / g.cpu_max).fold(0.0, f64::max)
}

/// Shortest NOMA upload time for which every GLD stays within its power cap.
pub fn t_up_g_lower_bound(glds: &[GldProfile], sys: &SystemParams) -> f64 {
    glds.iter().map(|g| min_upload_time(g, sys)).fold(0.0, f64::max)
}

/// Per-GLD inversion of the decreasing power curve by bisection.
fn min_upload_time(gld: &GldProfile, sys: &SystemParams) -> f64 {
    if sys.model_bits == 0.0 {
        return 0.0;
    }
    let over = |t: f64| power_unchecked(gld, t, sys) > gld.tx_power_max;
    let (mut lo, mut hi) = (0.5, 1.0);
    while over(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while !over(lo) && lo > f64::MIN_POSITIVE {
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if over(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// End-to-end delay of one FL iteration.
pub fn total_delay(t_gld: f64, t_bld: f64, sys: &SystemParams) -> f64 {
    t_gld.max(t_bld) + sys.fixed_delay()
}

/// Largest relative violation of each original constraint found by
/// [`check_solution`]. Zero means satisfied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Energy budget per GLD.
    pub energy: f64,
    /// CPU cap per GLD.
    pub cpu: f64,
    /// Transmit-power cap per GLD.
    pub power: f64,
    /// Jamming box `0 ≤ q_i ≤ Q_i^max`.
    pub jamming: f64,
    /// `Σ q_i g_iE` against the reported `q_agg`.
    pub aggregate: f64,
    /// BLD uploads completing within `t_up_b`.
    pub secrecy: f64,
}

impl ConstraintReport {
    pub fn worst(&self) -> f64 {
        [self.energy, self.cpu, self.power, self.jamming, self.aggregate, self.secrecy].into_iter().fold(0.0, f64::max)
    }
}

/// Re-evaluates a [`Solution`] against the original energy, CPU, power and
/// jamming constraints plus the BLD secrecy-throughput requirement.
pub fn check_solution(
    sol: &Solution,
    glds: &[GldProfile],
    blds: &[BldProfile],
    sys: &SystemParams,
) -> Result<ConstraintReport> {
    if sol.q.len() != glds.len() || sol.cpu_rates.len() != glds.len() || sol.tx_powers.len() != glds.len() {
        return Err(Error::Validation("solution vectors do not match the GLD count".into()));
    }
    let rel = |excess: f64, scale: f64| (excess / scale).max(0.0);
    let mut rep = ConstraintReport::default();
    let mut received = 0.0;
    for (k, g) in glds.iter().enumerate() {
        let v = g.cycles(sys) / sol.y;
        let e_loc = local_training_energy(g, v, sys)?;
        let e_up = upload_energy(g, sol.t_up_g, sys)?;
        let e = e_loc + e_up + jamming_energy(sol.q[k], sol.t_up_b);
        rep.energy = rep.energy.max(rel(e - g.energy_max, g.energy_max));
        rep.cpu = rep.cpu.max(rel(v - g.cpu_max, g.cpu_max));
        let p = noma_power(g, sol.t_up_g, sys)?;
        rep.power = rep.power.max(rel(p - g.tx_power_max, g.tx_power_max));
        rep.jamming =
            rep.jamming.max(rel(sol.q[k] - g.jam_power_max, g.jam_power_max)).max(rel(-sol.q[k], g.jam_power_max));
        received += sol.q[k] * g.gain_eaves;
    }
    if sol.q_agg > 0.0 {
        rep.aggregate = libm::fabs(received - sol.q_agg) / sol.q_agg;
    }
    for b in blds {
        let r = secrecy_rate(b, sol.q_agg, sys);
        let sent = r * sol.t_up_b;
        rep.secrecy = rep.secrecy.max(rel(b.data_bits - sent, b.data_bits));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_sys() -> SystemParams {
        SystemParams {
            bandwidth: 1e6,
            noise_coord: 1e-10,
            noise_eaves: 1e-10,
            local_iters: 1,
            cycles_per_bit: 1.0,
            switch_cap: 1e-28,
            model_bits: 1e6,
            coord_cpu: 10.0,
            t_agg: 1.0,
            t_up: 1.0,
            t_main: 0.01,
        }
    }

    fn gld(index: u32, data_bits: f64, gain_coord: f64) -> GldProfile {
        GldProfile {
            index,
            data_bits,
            gain_coord,
            gain_eaves: 1.6e-8,
            cpu_max: 1e9,
            tx_power_max: 1.9,
            jam_power_max: 1.1,
            energy_max: 3.8,
        }
    }

    fn bld(data_bits: f64) -> BldProfile {
        BldProfile { index: 1, data_bits, gain_coord: 1.0e-8, gain_eaves: 0.95e-9, tx_power: 1.6, noise: 1e-10 }
    }

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol * libm::fabs(b).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn training_latency_examples() {
        let sys = unit_sys();
        assert_eq!(local_training_latency(&gld(1, 10.0, 1.0), 10.0, &sys).unwrap(), 1.0);
        let sys2 = SystemParams { local_iters: 2, cycles_per_bit: 100.0, ..unit_sys() };
        let t = local_training_latency(&gld(1, 30e6, 1.0), 1e9, &sys2).unwrap();
        assert!(rel_eq(t, 6.0, 1e-15));
        assert_eq!(local_training_latency(&gld(1, 0.0, 1.0), 1e9, &sys2).unwrap(), 0.0);
        assert!(local_training_latency(&gld(1, 1.0, 1.0), 0.0, &sys).is_err());
        assert!(local_training_latency(&gld(1, 1.0, 1.0), -1.0, &sys).is_err());
    }

    #[test]
    fn training_energy_examples() {
        let sys = SystemParams { local_iters: 2, cycles_per_bit: 100.0, ..unit_sys() };
        let g = gld(1, 30e6, 1.0);
        let e = local_training_energy(&g, 1e9, &sys).unwrap();
        assert!(rel_eq(e, 0.6, 1e-12));
        assert_eq!(local_training_energy(&gld(1, 0.0, 1.0), 1e9, &sys).unwrap(), 0.0);
        let via_deadline = local_energy_for_deadline(&g, 6.0, &sys);
        assert!(rel_eq(via_deadline, 0.6, 1e-12));
        assert!(local_training_energy(&g, 0.0, &sys).is_err());
    }

    #[test]
    fn dt_latency_examples() {
        let sys = unit_sys();
        assert_eq!(dt_training_latency(&[bld(10.0)], &sys), 1.0);
        let sys2 = SystemParams { local_iters: 2, cycles_per_bit: 100.0, coord_cpu: 2e9, ..unit_sys() };
        let blds: Vec<_> = [2.0, 3.5, 3.0, 2.5].iter().map(|&m| bld(m * 1e6)).collect();
        assert!(rel_eq(dt_training_latency(&blds, &sys2), 1.1, 1e-12));
        assert_eq!(dt_training_latency(&[], &sys), 0.0);
    }

    #[test]
    fn noma_power_examples() {
        let sys = unit_sys();
        let p1 = noma_power(&gld(1, 1.0, 2.3e-8), 1.0, &sys).unwrap();
        assert!(rel_eq(p1, 1e-10 / 2.3e-8, 1e-12));
        assert!(rel_eq(p1, 4.348e-3, 1e-3));
        let p2 = noma_power(&gld(2, 1.0, 2.5e-8), 1.0, &sys).unwrap();
        assert!(rel_eq(p2, 8.0e-3, 1e-12));
        let empty = SystemParams { model_bits: 0.0, ..unit_sys() };
        for i in 1..=6 {
            assert_eq!(noma_power(&gld(i, 1.0, 2.3e-8), 1.0, &empty).unwrap(), 0.0);
            assert_eq!(upload_energy(&gld(i, 1.0, 2.3e-8), 1.0, &empty).unwrap(), 0.0);
        }
        assert!(noma_power(&gld(1, 1.0, 2.3e-8), 0.0, &sys).is_err());
    }

    #[test]
    fn upload_energy_examples() {
        let sys = unit_sys();
        let g = gld(1, 1.0, 2.3e-8);
        let e1 = upload_energy(&g, 1.0, &sys).unwrap();
        assert!(rel_eq(e1, 4.348e-3, 1e-3));
        let e2 = upload_energy(&g, 2.0, &sys).unwrap();
        assert!(e2 < e1);
        assert!(e2 > upload_energy_floor(&g, &sys));
    }

    #[test]
    fn slope_matches_finite_difference() {
        let sys = unit_sys();
        for i in 1..=6 {
            let g = gld(i, 1.0, 2.3e-8);
            for &t in &[0.5, 1.0, 3.0, 20.0] {
                let h = t * 1e-6;
                let fd =
                    (upload_energy_unchecked(&g, t + h, &sys) - upload_energy_unchecked(&g, t - h, &sys)) / (2.0 * h);
                let an = upload_energy_slope(&g, t, &sys);
                assert!(rel_eq(an, fd, 1e-5), "i={i} t={t}: {an} vs {fd}");
            }
        }
    }

    #[test]
    fn ln_energy_matches_direct() {
        let sys = unit_sys();
        for i in 1..=6 {
            let g = gld(i, 1.0, 2.3e-8);
            for &t in &[0.05, 1.0, 100.0] {
                let direct = libm::log(upload_energy_unchecked(&g, t, &sys));
                assert!(rel_eq(ln_upload_energy(&g, t, &sys), direct, 1e-10));
            }
        }
    }

    #[test]
    fn secrecy_rate_examples() {
        let sys = unit_sys();
        let b = bld(2e6);
        let r = secrecy_rate(&b, 3e-8, &sys);
        let expect = 1e6 * (libm::log2(161.0) - libm::log2(1.0 + 1.6 * 0.95e-9 / (1e-10 + 3e-8)));
        assert!(rel_eq(r, expect, 1e-12));
        assert!(rel_eq(r, 7.26e6, 2e-3));
        // Eavesdropper channel equal to the legitimate one.
        let twin = BldProfile { gain_eaves: 1.0e-8, ..b.clone() };
        assert_eq!(secrecy_rate(&twin, 0.0, &sys), 0.0);
        let far = secrecy_rate(&b, 1e30, &sys);
        assert!(rel_eq(far, 1e6 * libm::log2(161.0), 1e-12));
    }

    #[test]
    fn jamming_energy_examples() {
        assert_eq!(jamming_energy(0.0, 3.0), 0.0);
        assert!(rel_eq(jamming_energy(1.1, 0.5), 0.55, 1e-15));
        assert_eq!(jamming_energy(1.1, 0.0), 0.0);
    }

    #[test]
    fn q_lower_bound_examples() {
        let sys = unit_sys();
        let blds: Vec<_> = [(1.0, 0.95), (0.8, 0.85), (1.1, 1.15), (0.9, 1.05)]
            .iter()
            .map(|&(c, e)| BldProfile { gain_coord: c * 1e-8, gain_eaves: e * 1e-9, ..bld(1.0) })
            .collect();
        let lb = q_lower_bound(&blds, &sys);
        assert!(rel_eq(lb + 1e-10, 1.1666666666666667e-11, 1e-9));
        assert!(lb < 0.0);
        let sym = BldProfile { gain_eaves: 1e-8, ..bld(1.0) };
        assert_eq!(q_lower_bound(&[sym], &sys), 0.0);
        let strong = BldProfile { gain_eaves: 1e-7, ..bld(1.0) };
        assert!(rel_eq(q_lower_bound(&[strong], &sys), 9e-10, 1e-12));
    }

    #[test]
    fn q_upper_bound_examples() {
        let caps = [1.1, 0.8, 0.9, 1.2, 0.7, 1.0];
        let gains = [1.6, 1.3, 1.7, 1.4, 1.2, 1.5];
        let glds: Vec<_> = (0..6)
            .map(|k| GldProfile { jam_power_max: caps[k], gain_eaves: gains[k] * 1e-8, ..gld(k as u32 + 1, 1.0, 1.0) })
            .collect();
        assert!(rel_eq(q_upper_bound(&glds), 8.35e-8, 1e-12));
        let one = GldProfile { jam_power_max: 1.0, gain_eaves: 1.0, ..gld(1, 1.0, 1.0) };
        assert_eq!(q_upper_bound(&[one]), 1.0);
        assert_eq!(q_upper_bound(&[]), 0.0);
    }

    #[test]
    fn bld_upload_time_examples() {
        let sys = unit_sys();
        let b = bld(2e6);
        let t = min_bld_upload_time(core::slice::from_ref(&b), 1e30, &sys).unwrap();
        assert!(rel_eq(t, 2e6 / (1e6 * libm::log2(161.0)), 1e-12));
        assert!(rel_eq(t, 0.2728, 1e-3));
        let twin = BldProfile { index: 7, gain_eaves: 1.0e-8, ..b };
        assert_eq!(min_bld_upload_time(&[twin], 0.0, &sys), Err(Error::ZeroSecrecy { index: 7, q_agg: 0.0 }));
        assert_eq!(min_bld_upload_time(&[], 0.0, &sys).unwrap(), 0.0);
    }

    #[test]
    fn y_lower_bound_examples() {
        let sys = SystemParams { local_iters: 2, cycles_per_bit: 100.0, ..unit_sys() };
        let data = [30.0, 45.0, 40.0, 50.0, 55.0, 35.0];
        let cpu = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0];
        let glds: Vec<_> =
            (0..6).map(|k| GldProfile { cpu_max: cpu[k] * 1e9, ..gld(k as u32 + 1, data[k] * 1e6, 1.0) }).collect();
        assert!(rel_eq(y_lower_bound(&glds, &sys), 7.5, 1e-12));
        let one = GldProfile { cpu_max: 5.0, ..gld(1, 5.0, 1.0) };
        assert_eq!(y_lower_bound(&[one], &unit_sys()), 1.0);
        assert_eq!(y_lower_bound(&[], &sys), 0.0);
    }

    #[test]
    fn t_lower_bound_examples() {
        let sys = unit_sys();
        let g = gld(1, 1.0, 2.3e-8);
        let closed = 1e6 / (1e6 * libm::log2(1.0 + 1.9 * 2.3e-8 / 1e-10));
        let t = t_up_g_lower_bound(core::slice::from_ref(&g), &sys);
        assert!(rel_eq(t, closed, 1e-12));
        assert!(rel_eq(t, 0.1140, 1e-3));
        let empty = SystemParams { model_bits: 0.0, ..unit_sys() };
        assert_eq!(t_up_g_lower_bound(core::slice::from_ref(&g), &empty), 0.0);

        let g2 = GldProfile { tx_power_max: 2.1, ..gld(2, 1.0, 2.5e-8) };
        let pair = [g, g2];
        let bound = t_up_g_lower_bound(&pair, &sys);
        // Dense grid cross-check: first grid point where both caps hold.
        let mut grid_first = f64::NAN;
        for k in 1..=200_000 {
            let t = k as f64 * 1e-5;
            if pair.iter().all(|g| noma_power(g, t, &sys).unwrap() <= g.tx_power_max) {
                grid_first = t;
                break;
            }
        }
        assert!(bound <= grid_first && grid_first - bound <= 1e-5 + 1e-12);
    }

    #[test]
    fn total_delay_examples() {
        let sys = unit_sys();
        assert!(rel_eq(total_delay(5.0, 3.0, &sys), 7.01, 1e-15));
        assert_eq!(total_delay(4.0, 4.0, &sys), total_delay(4.0, 4.0 - 0.0, &sys));
        let zero = SystemParams { t_agg: 0.0, t_up: 0.0, t_main: 0.0, ..unit_sys() };
        assert_eq!(total_delay(0.0, 0.0, &zero), 0.0);
    }

    #[test]
    fn validation_rejects_bad_profiles() {
        assert!(unit_sys().validate().is_ok());
        assert!(SystemParams { bandwidth: 0.0, ..unit_sys() }.validate().is_err());
        assert!(SystemParams { t_main: f64::NAN, ..unit_sys() }.validate().is_err());
        assert!(GldProfile { index: 0, ..gld(1, 1.0, 1.0) }.validate().is_err());
        assert!(GldProfile { energy_max: -1.0, ..gld(1, 1.0, 1.0) }.validate().is_err());
        let dup = [gld(1, 1.0, 1.0), gld(1, 2.0, 1.0)];
        assert!(validate_cluster(&unit_sys(), &dup, &[]).is_err());
    }
}
