//! Surface-code resource model: logical error rate, rotation cost, cycle count, code
//! distance, distillation factory, footprint and wall time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::gate_algebra::GateCounts;
use crate::scalar::Real;
use crate::sk::{BaseNet, CompiledRotation, Synthesizer};
use crate::tim_model::{solve_k0_capped, TrotterMode, DEFAULT_K0_CAP};

pub const DEFAULT_P_TH: f64 = 0.0057;
pub const DEFAULT_T_PHYS: f64 = 20e-9;
pub const DEFAULT_D_CAP: u32 = 999;
/// Physical steps per surface-code cycle.
pub const STEPS_PER_CYCLE: f64 = 8.0;
/// Physical qubits per logical qubit, in units of `d²`.
pub const QUBITS_PER_LOGICAL_D2: f64 = 12.5;
/// Rotation slots per Trotter step in the cycle count; the strict synthesis budget splits
/// the per-step error among them.
pub const ROTATIONS_PER_STEP: f64 = 9.0;
/// `e_{L+1} = 35 e_L³` contracts only below this input error.
pub const DISTILLATION_MAX_INPUT: f64 = 0.169;

/// Which expression is used for the total cycle count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleFormula {
    /// `Σ_{m<M} [2^m k₀(9S_R + 30d) + 4S_R + 10d]`.
    #[default]
    ExplicitSum,
    /// `2^{M−1} k₀(9S_R + 30d) + 4M(S_R + 2.5d)`, the commonly quoted closed form with a
    /// halved leading prefactor.
    HalfPrefactor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimProblem {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub tau: f64,
    pub r: f64,
    pub p_ratio: f64,
    pub p_th: f64,
    pub t_phys: f64,
    /// Raw injected magic-state error; `p_ratio · p_th` when absent.
    pub p_inject: Option<f64>,
    /// Divide the synthesis budget by [`ROTATIONS_PER_STEP`].
    pub strict_sk_budget: bool,
    /// Trotter error evaluator; exact for small chains, the bound otherwise.
    pub trotter_mode: Option<TrotterMode>,
    pub k0_cap: u64,
    pub d_cap: u32,
    pub cycle_formula: CycleFormula,
}

impl TimProblem {
    pub fn new(n: usize, m: u32) -> Self {
        TimProblem {
            n,
            m,
            tau: default_tau(n),
            r: 1.0,
            p_ratio: 0.1,
            p_th: DEFAULT_P_TH,
            t_phys: DEFAULT_T_PHYS,
            p_inject: None,
            strict_sk_budget: false,
            trotter_mode: None,
            k0_cap: DEFAULT_K0_CAP,
            d_cap: DEFAULT_D_CAP,
            cycle_formula: CycleFormula::ExplicitSum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(Stage::Surface, msg));
        if self.n < 2 {
            return bad(format!("N must be at least 2, got {}", self.n));
        }
        if self.m < 1 || self.m > 60 {
            return bad(format!("M must lie in 1..=60, got {}", self.m));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return bad(format!("r must lie in (0, 1], got {}", self.r));
        }
        if !(self.p_ratio > 0.0 && self.p_ratio < 1.0) {
            return bad(format!("p_ratio must lie in (0, 1), got {}", self.p_ratio));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.p_th > 0.0 && self.t_phys > 0.0) {
            return bad("p_th and t_phys must be positive".into());
        }
        if let Some(p) = self.p_inject {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("p_inject must lie in (0, 1), got {p}"));
            }
        }
        Ok(())
    }

    pub fn p_inject(&self) -> f64 {
        self.p_inject.unwrap_or(self.p_ratio * self.p_th)
    }
}

/// `π/(2N)`.
pub fn default_tau(n: usize) -> f64 {
    std::f64::consts::PI / (2.0 * n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub d: u32,
    pub k0: u64,
    /// Counts of the most expensive compiled rotation.
    pub counts: GateCounts,
    #[serde(rename = "S_R")]
    pub s_r: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Q")]
    pub q: u64,
    pub distill_level: u32,
    pub factory_logical_qubits: u64,
    pub total_logical_qubits: u64,
    pub physical_qubits: u64,
    /// `9.91N · 12.5d²` footprint without the `+6` constant of `3(N + 2)`.
    pub physical_qubits_simplified: u64,
    pub wall_seconds: f64,
    #[serde(rename = "p_L")]
    pub p_l: f64,
    pub eps_sk: f64,
    pub worst_angle: f64,
    pub sk_depth: usize,
    pub distilled_error: f64,
}

/// `0.043 · (p/p_th)^{(d+1)/2}`.
pub fn logical_error_rate<T: Real>(p_ratio: T, d: u32) -> Result<T> {
    if !(p_ratio > T::zero() && p_ratio < T::one()) {
        return Err(Error::invalid(
            Stage::Surface,
            format!("p/p_th = {p_ratio} must lie in (0, 1)"),
        ));
    }
    if d == 0 {
        return Err(Error::invalid(
            Stage::Surface,
            "code distance must be at least 1",
        ));
    }
    Ok(T::lit(0.043) * p_ratio.powi(((d + 1) / 2) as i32) * half_power(p_ratio, d))
}

// odd d gives an integer exponent; even d carries an extra sqrt
fn half_power<T: Real>(p: T, d: u32) -> T {
    if (d + 1) % 2 == 0 {
        T::one()
    } else {
        p.sqrt()
    }
}

/// Cycles for one compiled rotation: `d(11.25N_T + 10N_S + 2.5N_H)`.
pub fn s_r<T: Real>(counts: &GateCounts, d: u32) -> T {
    T::lit(d as f64)
        * (T::lit(11.25) * T::lit(counts.n_t as f64)
            + T::lit(10.0) * T::lit(counts.n_s as f64)
            + T::lit(2.5) * T::lit(counts.n_h as f64))
}

/// Total cycle count as the explicit sum over the `M` rounds.
pub fn total_cycles<T: Real>(m: u32, k0: u64, s_r: T, d: u32) -> T {
    let d = T::lit(d as f64);
    let k0 = T::lit(k0 as f64);
    let per_step = T::lit(9.0) * s_r + T::lit(30.0) * d;
    let per_round = T::lit(3.0) * s_r + T::lit(10.0) * d + s_r;
    (0..m).fold(T::zero(), |acc, j| {
        acc + T::lit(2f64.powi(j as i32)) * k0 * per_step + per_round
    })
}

/// `(2^M − 1) k₀(9S_R + 30d) + 4M(S_R + 2.5d)`.
pub fn total_cycles_closed<T: Real>(m: u32, k0: u64, s_r: T, d: u32) -> T {
    let d = T::lit(d as f64);
    let mm = T::lit(m as f64);
    T::lit(2f64.powi(m as i32) - 1.0) * T::lit(k0 as f64) * (T::lit(9.0) * s_r + T::lit(30.0) * d)
        + T::lit(4.0) * mm * (s_r + T::lit(2.5) * d)
}

/// `2^{M−1} k₀(9S_R + 30d) + 4M(S_R + 2.5d)`.
pub fn total_cycles_half_prefactor<T: Real>(m: u32, k0: u64, s_r: T, d: u32) -> T {
    let d = T::lit(d as f64);
    let mm = T::lit(m as f64);
    T::lit(2f64.powi(m as i32 - 1)) * T::lit(k0 as f64) * (T::lit(9.0) * s_r + T::lit(30.0) * d)
        + T::lit(4.0) * mm * (s_r + T::lit(2.5) * d)
}

fn cycles(formula: CycleFormula, m: u32, k0: u64, s_r: f64, d: u32) -> f64 {
    match formula {
        CycleFormula::ExplicitSum => total_cycles(m, k0, s_r, d),
        CycleFormula::HalfPrefactor => total_cycles_half_prefactor(m, k0, s_r, d),
    }
}

/// `3(N + 2)`: register, output qubit and two ancillas per site.
pub fn logical_qubits(n: usize) -> u64 {
    3 * (n as u64 + 2)
}

/// Smallest `L ≥ 0` with `e_L ≤ target`, where `e₀ = p_in` and `e_{L+1} = 35 e_L³`.
pub fn distillation_level<T: Real>(p_in: T, target: T) -> Result<(u32, T)> {
    if !(p_in > T::zero() && p_in < T::lit(DISTILLATION_MAX_INPUT)) {
        return Err(Error::invalid(
            Stage::Surface,
            format!("injected error {p_in} outside (0, {DISTILLATION_MAX_INPUT}); distillation diverges"),
        ));
    }
    if !(target > T::zero()) {
        return Err(Error::invalid(
            Stage::Surface,
            "distillation target must be positive",
        ));
    }
    let mut level = 0;
    let mut e = p_in;
    while e > target {
        e = distill_once(e);
        level += 1;
    }
    Ok((level, e))
}

/// One 15-to-1 round: `35p³`.
pub fn distill_once<T: Real>(p: T) -> T {
    T::lit(35.0) * p * p * p
}

/// Magic-state factory sizing for one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactoryRequirements {
    /// States per unit time (unit time = 1.25d cycles).
    pub rate: f64,
    /// Factory volume per unit time.
    pub volume_rate: f64,
    pub factory_logical_qubits: u64,
}

/// Volume per unit time per `N`, kept to two decimals.
///
/// One output per `13.75d / 1.25d = 11` unit times per spin. A second-level block has volume
/// 192 over 6 unit times; feeding it takes 15 first-level blocks of volume 192 over
/// `8 · 3` unit times: `(192/6 + 192·15/24)/11 = 13.82`. A single level keeps only the
/// first term, `(192/6)/11 = 2.91` (an extrapolation of the same bookkeeping).
pub fn factory_volume_coefficient(level: u32) -> Result<f64> {
    let raw: f64 = match level {
        1 => 192.0 / 6.0 / 11.0,
        2 => (192.0 / 6.0 + 192.0 * 15.0 / (8.0 * 3.0)) / 11.0,
        other => {
            return Err(Error::invalid(
                Stage::Surface,
                format!("distillation level {other} has no factory layout (1 or 2 supported)"),
            ))
        }
    };
    Ok((raw * 100.0).round() / 100.0)
}

pub fn factory_requirements(n: usize, level: u32) -> Result<FactoryRequirements> {
    let coef = factory_volume_coefficient(level)?;
    // coefficient in hundredths keeps ceil(N · coef/2) exact
    let hundredths = (coef * 100.0).round() as u64;
    let qubits = (n as u64 * hundredths).div_ceil(200);
    Ok(FactoryRequirements {
        rate: n as f64 / 11.0,
        volume_rate: coef * n as f64,
        factory_logical_qubits: qubits,
    })
}

/// `ceil(logical · 12.5 d²)`.
pub fn physical_qubits_for(logical: u64, d: u32) -> u64 {
    (logical * 25 * (d as u64) * (d as u64)).div_ceil(2)
}

/// `ceil((3(N + 2) + 6.91N) · 12.5 d²)`, the footprint with a level-2 factory.
pub fn physical_qubits(n: usize, d: u32) -> u64 {
    let factory = factory_requirements(n, 2)
        .expect("level 2 supported")
        .factory_logical_qubits;
    physical_qubits_for(logical_qubits(n) + factory, d)
}

/// `ceil(9.91N · 12.5 d²)`.
pub fn physical_qubits_simplified(n: usize, d: u32) -> u64 {
    // 9.91 · 12.5 = 991 · 125 / 10³ per N·d²
    (n as u64 * 991 * 125 * (d as u64) * (d as u64)).div_ceil(1_000)
}

/// `K · 8 · t_phys`.
pub fn wall_time<T: Real>(k: T, t_phys: T) -> T {
    k * T::lit(STEPS_PER_CYCLE) * t_phys
}

/// Outcome of the distance search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSolution {
    pub d: u32,
    /// Rounded up to whole cycles.
    pub k: f64,
    pub p_l: f64,
}

fn budget_check(
    problem: &TimProblem,
    k0: u64,
    counts: &GateCounts,
    d: u32,
) -> Result<(bool, f64, f64)> {
    let k = cycles(problem.cycle_formula, problem.m, k0, s_r(counts, d), d).ceil();
    let p_l = logical_error_rate(problem.p_ratio, d)?;
    let q = logical_qubits(problem.n) as f64;
    Ok((p_l * k * q <= problem.r, k, p_l))
}

/// Smallest odd `d ≥ 3` with `p_L(d) · K(d) · Q ≤ r`.
pub fn solve_distance(
    problem: &TimProblem,
    k0: u64,
    counts: &GateCounts,
) -> Result<DistanceSolution> {
    problem.validate()?;
    let mut d = 3;
    while d <= problem.d_cap {
        let (ok, k, p_l) = budget_check(problem, k0, counts, d)?;
        if ok {
            return Ok(DistanceSolution { d, k, p_l });
        }
        d += 2;
    }
    Err(Error::Infeasible {
        stage: Stage::Surface,
        msg: format!(
            "no odd d ≤ {} meets p_L·K·Q ≤ r = {} (p_ratio {}, k0 {k0})",
            problem.d_cap, problem.r, problem.p_ratio
        ),
    })
}

/// `true` when the budget fails at `d − 2` (or `d = 3`).
pub fn is_minimal_distance(
    problem: &TimProblem,
    k0: u64,
    counts: &GateCounts,
    d: u32,
) -> Result<bool> {
    if d <= 3 {
        return Ok(true);
    }
    Ok(!budget_check(problem, k0, counts, d - 2)?.0)
}

/// Rotation angles the circuit synthesizes: the two Trotter angles `θ` (transverse field)
/// and `2θ` (coupling) with `θ = τ/k₀`, and the feedback angles `π/2^j`, `j = 1 … M−1`.
pub fn required_angles(tau: f64, k0: u64, m: u32) -> Vec<f64> {
    let theta = tau / k0 as f64;
    let mut angles = vec![theta, 2.0 * theta];
    angles.extend((1..m).map(|j| std::f64::consts::PI / 2f64.powi(j as i32)));
    angles
}

/// Synthesis tolerance `2^{−M}/k₀`, optionally split over [`ROTATIONS_PER_STEP`].
pub fn sk_budget(m: u32, k0: u64, strict: bool) -> f64 {
    let eps = 0.5f64.powi(m as i32) / k0 as f64;
    if strict {
        eps / ROTATIONS_PER_STEP
    } else {
        eps
    }
}

/// Compiles every required angle at `eps` and returns the one with the largest cycle cost.
pub fn worst_rotation(
    angles: &[f64],
    eps: f64,
    net: &BaseNet<f64>,
) -> Result<CompiledRotation<f64>> {
    let synth = Synthesizer::new(net);
    let mut worst: Option<CompiledRotation<f64>> = None;
    for &angle in angles {
        let c = synth.compile_rz(angle, eps)?;
        let cost = c.seq.counts.unit_cost();
        if worst
            .as_ref()
            .is_none_or(|w| cost > w.seq.counts.unit_cost())
        {
            worst = Some(c);
        }
    }
    worst.ok_or_else(|| Error::invalid(Stage::Surface, "no rotation angles"))
}

pub fn solve_k0_for(problem: &TimProblem) -> Result<u64> {
    let mode = problem
        .trotter_mode
        .unwrap_or_else(|| TrotterMode::auto(problem.n));
    solve_k0_capped(problem.n, problem.m, problem.tau, mode, problem.k0_cap)
}

/// Full pipeline: Trotter number, rotation synthesis, distance, distillation and footprint.
pub fn estimate_surface(problem: &TimProblem, net: &BaseNet<f64>) -> Result<SurfaceReport> {
    problem.validate()?;
    let k0 = solve_k0_for(problem)?;
    let eps_sk = sk_budget(problem.m, k0, problem.strict_sk_budget);
    let worst = worst_rotation(&required_angles(problem.tau, k0, problem.m), eps_sk, net)?;
    let counts = worst.seq.counts;
    let sol = solve_distance(problem, k0, &counts)?;
    let q = logical_qubits(problem.n);
    let target = problem.r / (sol.k * q as f64);
    let (level, distilled) = distillation_level(problem.p_inject(), target)?;
    let factory = match level {
        0 => 0,
        1 | 2 => factory_requirements(problem.n, level)?.factory_logical_qubits,
        other => {
            return Err(Error::Infeasible {
                stage: Stage::Surface,
                msg: format!(
                    "magic states need {other} distillation levels (target {target:e}); at most 2 supported"
                ),
            })
        }
    };
    let total = q + factory;
    Ok(SurfaceReport {
        d: sol.d,
        k0,
        counts,
        s_r: s_r(&counts, sol.d),
        k: sol.k,
        q,
        distill_level: level,
        factory_logical_qubits: factory,
        total_logical_qubits: total,
        physical_qubits: physical_qubits_for(total, sol.d),
        physical_qubits_simplified: physical_qubits_simplified(problem.n, sol.d),
        wall_seconds: wall_time(sol.k, problem.t_phys),
        p_l: sol.p_l,
        eps_sk,
        worst_angle: worst.target_angle,
        sk_depth: worst.depth,
        distilled_error: distilled,
    })
}
