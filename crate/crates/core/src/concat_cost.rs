//! Concatenated Steane-code comparison model: logical time steps, error-correction
//! turn-on, concatenation level, footprint and wall time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::scalar::Real;
use crate::sk::{BaseNet, Synthesizer};
use crate::surface_cost::{required_angles, sk_budget};
use crate::tim_model::{solve_k0_capped, TrotterMode, DEFAULT_K0_CAP};

/// Physical qubits per logical qubit per concatenation level.
pub const QUBITS_PER_LEVEL: u64 = 21;
/// Deepest concatenation considered.
pub const MAX_LEVEL: u32 = 8;
/// Evolution time per unit of the phase register for this model.
pub const DEFAULT_TAU: f64 = 1.0;
/// Wall-time multiplier per level; calibrated so that `N = 100`, `M = 10` takes about
/// 10² days with the other defaults.
pub const DEFAULT_LEVEL_OVERHEAD_BASE: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatConfig {
    pub p_phys: f64,
    pub eps_threshold: f64,
    pub t_phys: f64,
    /// Logical qubits; `4N` when absent.
    pub q_logical: Option<u64>,
    pub level_overhead_base: f64,
    pub tau: f64,
    pub trotter_mode: Option<TrotterMode>,
    pub k0_cap: u64,
    /// Divide the synthesis budget over the rotations of one Trotter step.
    pub strict_sk_budget: bool,
}

impl Default for ConcatConfig {
    fn default() -> Self {
        ConcatConfig {
            p_phys: 1e-7,
            eps_threshold: 3.1e-6,
            t_phys: 1e-5,
            q_logical: None,
            level_overhead_base: DEFAULT_LEVEL_OVERHEAD_BASE,
            tau: DEFAULT_TAU,
            trotter_mode: None,
            k0_cap: DEFAULT_K0_CAP,
            strict_sk_budget: false,
        }
    }
}

impl ConcatConfig {
    pub fn q_for(&self, n: usize) -> u64 {
        self.q_logical.unwrap_or(4 * n as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_phys", self.p_phys),
            ("eps_threshold", self.eps_threshold),
            ("t_phys", self.t_phys),
            ("level_overhead_base", self.level_overhead_base),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    Stage::Concat,
                    format!("{name} must be positive, got {v}"),
                ));
            }
        }
        if self.q_logical == Some(0) {
            return Err(Error::invalid(Stage::Concat, "Q_logical must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub k0: u64,
    #[serde(rename = "K")]
    pub k: f64,
    pub ec_needed: bool,
    pub level: u32,
    #[serde(rename = "S_R")]
    pub s_r: u64,
    pub physical_qubits: u64,
    pub wall_seconds: f64,
    /// Synthesis depth of the worst rotation; 0 when rotations are native.
    pub sk_depth: usize,
}

/// `Σ_{m<M} [2^m k₀(9S_R + 11) + 4S_R + 4]`.
pub fn total_cycles_concat<T: Real>(m: u32, k0: u64, s_r: T) -> T {
    let k0 = T::lit(k0 as f64);
    let per_step = T::lit(9.0) * s_r + T::lit(11.0);
    let per_round = T::lit(4.0) * s_r + T::lit(4.0);
    (0..m).fold(T::zero(), |acc, j| {
        acc + T::lit(2f64.powi(j as i32)) * k0 * per_step + per_round
    })
}

/// `(2^M − 1)k₀(9S_R + 11) + M(4S_R + 4)`.
pub fn total_cycles_concat_closed<T: Real>(m: u32, k0: u64, s_r: T) -> T {
    T::lit(2f64.powi(m as i32) - 1.0) * T::lit(k0 as f64) * (T::lit(9.0) * s_r + T::lit(11.0))
        + T::lit(m as f64) * (T::lit(4.0) * s_r + T::lit(4.0))
}

/// Error correction is needed when the per-gate budget `1/(KQ)` is tighter than `p_phys`.
pub fn ec_needed<T: Real>(k: T, q: u64, p_phys: T) -> bool {
    T::one() / (k * T::lit(q as f64)) < p_phys
}

/// `th · (p/th)^{2^L}`.
pub fn level_error<T: Real>(p_phys: T, eps_threshold: T, level: u32) -> T {
    eps_threshold * (p_phys / eps_threshold).powi(1 << level)
}

/// Smallest `L ≥ 1` with `th · (p/th)^{2^L} ≤ target`.
pub fn concat_level<T: Real>(p_phys: T, eps_threshold: T, target: T) -> Result<u32> {
    if !(p_phys > T::zero() && p_phys < eps_threshold) {
        return Err(Error::invalid(
            Stage::Concat,
            format!("p_phys {p_phys} must lie below the threshold {eps_threshold}"),
        ));
    }
    if !(target > T::zero()) {
        return Err(Error::invalid(Stage::Concat, "target must be positive"));
    }
    (1..=MAX_LEVEL)
        .find(|&l| level_error(p_phys, eps_threshold, l) <= target)
        .ok_or_else(|| {
            Error::limit(
                Stage::Concat,
                "max_level",
                format!("target {target} not reached within {MAX_LEVEL} levels"),
            )
        })
}

/// `21^L · Q`.
pub fn concat_physical_qubits(q_logical: u64, level: u32) -> u64 {
    QUBITS_PER_LEVEL.pow(level) * q_logical
}

pub fn estimate_concat(
    n: usize,
    m: u32,
    config: &ConcatConfig,
    net: &BaseNet<f64>,
) -> Result<ConcatReport> {
    config.validate()?;
    if n < 2 || !(1..=60).contains(&m) {
        return Err(Error::invalid(
            Stage::Concat,
            format!("need N ≥ 2 and 1 ≤ M ≤ 60, got N={n}, M={m}"),
        ));
    }
    let mode = config.trotter_mode.unwrap_or_else(|| TrotterMode::auto(n));
    let k0 = solve_k0_capped(n, m, config.tau, mode, config.k0_cap)?;
    let q = config.q_for(n);

    // native rotations first
    let k_native = total_cycles_concat(m, k0, 1.0);
    if !ec_needed(k_native, q, config.p_phys) {
        return Ok(ConcatReport {
            n,
            m,
            k0,
            k: k_native,
            ec_needed: false,
            level: 0,
            s_r: 1,
            physical_qubits: q,
            wall_seconds: k_native * config.t_phys,
            sk_depth: 0,
        });
    }

    let eps = sk_budget(m, k0, config.strict_sk_budget);
    let synth = Synthesizer::new(net);
    let mut s_r = 0u64;
    let mut depth = 0;
    for angle in required_angles(config.tau, k0, m) {
        let c = synth.compile_rz(angle, eps)?;
        if c.seq.counts.total() > s_r {
            s_r = c.seq.counts.total();
            depth = c.depth;
        }
    }
    let s_r = s_r.max(1);
    let k = total_cycles_concat(m, k0, s_r as f64);
    let level = concat_level(config.p_phys, config.eps_threshold, 1.0 / (k * q as f64))?;
    Ok(ConcatReport {
        n,
        m,
        k0,
        k,
        ec_needed: true,
        level,
        s_r,
        physical_qubits: concat_physical_qubits(q, level),
        wall_seconds: k * config.t_phys * config.level_overhead_base.powi(level as i32),
        sk_depth: depth,
    })
}
