//! State-vector simulation of iterative phase estimation on the TIM chain.
//!
//! Conventions: the oracle is `U = exp(−iHτ)`, so an eigenvalue `E` appears as the phase
//! `e^{2πiφ}` with `φ = (−Eτ/2π) mod 1`. Bits are measured least significant first; round
//! `k` (from `M` down to 1) applies `U^{2^{k−1}}` and yields `x_k` of `φ = 0.x₁x₂…x_M`.
//! The ancilla is the most significant qubit of the simulated register.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::gate_algebra::{rz, Unitary2};
use crate::sk::{BaseNet, Synthesizer};
use crate::tim_model::{
    diagonalize, exact_evolution, matrix_power, solve_k0, trotter_step, CMatrix, TrotterMode,
    MAX_UNITARY_SPINS,
};

pub type CVector = DVector<Complex64>;

/// Largest number of phase bits simulated.
pub const MAX_BITS: u32 = 16;
/// Largest chain simulated with SK-compiled rotations.
pub const MAX_SK_SPINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Exact,
    Trotter,
    TrotterSk,
}

impl std::fmt::Display for OracleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleMode::Exact => "exact",
            OracleMode::Trotter => "trotter",
            OracleMode::TrotterSk => "trotter_sk",
        })
    }
}

impl std::str::FromStr for OracleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(OracleMode::Exact),
            "trotter" => Ok(OracleMode::Trotter),
            "trotter_sk" | "trotter-sk" => Ok(OracleMode::TrotterSk),
            other => Err(Error::invalid(
                Stage::Simulation,
                format!("unknown oracle mode `{other}` (exact|trotter|trotter_sk)"),
            )),
        }
    }
}

/// How the register is prepared before the first round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    /// Exact ground state from diagonalization.
    Ground,
    /// `f·|g⟩⟨g| + (1 − f)·I/d`, sampled per run: with probability `1 − f` the register
    /// starts in a uniformly chosen eigenstate instead of the ground state.
    Depolarized { overlap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpeaRun {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub tau: f64,
    pub oracle_mode: OracleMode,
    pub seed: u64,
    /// `x₁ … x_M`, most significant first.
    pub bits: Vec<u8>,
    pub phase_estimate: f64,
    pub energy_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k0: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct IpeaConfig {
    pub n: usize,
    pub bits: u32,
    pub tau: f64,
    pub mode: OracleMode,
    pub seed: u64,
    pub input: InputState,
    /// Base Trotter number; solved with the exact evaluator when absent.
    pub k0: Option<u64>,
    /// Per-rotation synthesis tolerance in `trotter_sk` mode; `2^{−M}/k₀` when absent.
    pub sk_eps: Option<f64>,
}

impl IpeaConfig {
    pub fn new(n: usize, bits: u32, mode: OracleMode, seed: u64) -> Self {
        IpeaConfig {
            n,
            bits,
            tau: default_tau(n),
            mode,
            seed,
            input: InputState::Ground,
            k0: None,
            sk_eps: None,
        }
    }
}

/// `π/(2N)`: keeps `|E|τ < π` for the chain's ground state.
pub fn default_tau(n: usize) -> f64 {
    std::f64::consts::PI / (2.0 * n as f64)
}

/// Block-diagonal `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U` with the control as most significant qubit.
pub fn controlled_u(u: &CMatrix) -> Result<CMatrix> {
    let d = u.nrows();
    if d != u.ncols() || !d.is_power_of_two() {
        return Err(Error::invalid(
            Stage::Simulation,
            "U must be square of power-of-two size",
        ));
    }
    if d > 1 << MAX_UNITARY_SPINS {
        return Err(Error::limit(
            Stage::Simulation,
            "max_unitary_spins",
            format!("register of dimension {d} exceeds 2^{MAX_UNITARY_SPINS}"),
        ));
    }
    let mut c = CMatrix::identity(2 * d, 2 * d);
    c.view_mut((d, d), (d, d)).copy_from(u);
    Ok(c)
}

/// `−2π Σ_j b_j 2^{−(j+1)}` where `b₁` is the most recently measured bit.
pub fn feedback_angle(measured_bits: &[u8]) -> f64 {
    -std::f64::consts::TAU
        * measured_bits
            .iter()
            .enumerate()
            .map(|(j, &b)| b as f64 * 0.5f64.powi(j as i32 + 2))
            .sum::<f64>()
}

/// `Σ x_j 2^{−j}` for bits `x₁ … x_M`.
pub fn phase_from_bits(bits: &[u8]) -> f64 {
    bits.iter()
        .enumerate()
        .map(|(j, &b)| b as f64 * 0.5f64.powi(j as i32 + 1))
        .sum()
}

/// `−2π φ_u / τ`, where `φ_u = φ` for `φ ≤ 1/2` and `φ − 1` otherwise.
pub fn energy_from_phase(phase: f64, tau: f64) -> f64 {
    let unwrapped = if phase <= 0.5 { phase } else { phase - 1.0 };
    -std::f64::consts::TAU * unwrapped / tau
}

/// Per-round trace of one iterative phase estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct IpeaTrace {
    /// `x₁ … x_M`, most significant first.
    pub bits: Vec<u8>,
    /// Probability of outcome 1 in each round, in measurement order (`x_M` first).
    pub p_one: Vec<f64>,
    /// Register norm after each round's projection and renormalization, before rescaling.
    pub norms: Vec<f64>,
}

// One round on register state `psi` with oracle power `u`: returns the two unnormalized
// post-measurement register states (outcome 0, outcome 1). The full controlled circuit is
// H · diag(1, e^{iω}) · C-U · H on the ancilla.
fn round_branches(u: &CMatrix, psi: &CVector, omega: f64) -> (CVector, CVector) {
    let d = psi.len();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut state = CVector::zeros(2 * d);
    state
        .rows_mut(0, d)
        .copy_from(&(psi * Complex64::new(h, 0.0)));
    state
        .rows_mut(d, d)
        .copy_from(&(psi * Complex64::new(h, 0.0)));
    let mut state = controlled_u(u).expect("checked dimensions") * state;
    let phase = Complex64::from_polar(1.0, omega);
    for x in state.rows_mut(d, d).iter_mut() {
        *x *= phase;
    }
    let top = state.rows(0, d).into_owned();
    let bottom = state.rows(d, d).into_owned();
    let hc = Complex64::new(h, 0.0);
    ((&top + &bottom) * hc, (&top - &bottom) * hc)
}

/// Runs the iterative rounds with `powers[m] = U^{2^m}` on the given input register.
pub fn run_rounds(powers: &[CMatrix], input: &CVector, rng: &mut impl Rng) -> IpeaTrace {
    let bits_total = powers.len();
    let mut psi = input.clone();
    let mut measured: Vec<u8> = Vec::with_capacity(bits_total); // x_M first
    let mut p_one = Vec::with_capacity(bits_total);
    let mut norms = Vec::with_capacity(bits_total);
    for k in (1..=bits_total).rev() {
        let recent_first: Vec<u8> = measured.iter().rev().cloned().collect();
        let omega = feedback_angle(&recent_first);
        let (zero, one) = round_branches(&powers[k - 1], &psi, omega);
        let p1 = one.norm_squared();
        let p0 = zero.norm_squared();
        let draw: f64 = rng.random();
        let (bit, branch, p) = if draw < p1 / (p0 + p1) {
            (1u8, one, p1)
        } else {
            (0u8, zero, p0)
        };
        norms.push(p0 + p1);
        p_one.push(p1 / (p0 + p1));
        psi = branch / Complex64::new(p.sqrt(), 0.0);
        measured.push(bit);
    }
    measured.reverse();
    IpeaTrace {
        bits: measured,
        p_one,
        norms,
    }
}

/// Exact probability of every bit string `x₁…x_M` (index `Σ x_j 2^{M−j}`).
pub fn bit_distribution(powers: &[CMatrix], input: &CVector) -> Vec<f64> {
    let m = powers.len();
    let mut out = vec![0.0; 1 << m];
    // depth-first over outcomes; `psi` carries the unnormalized branch amplitude
    fn recurse(
        powers: &[CMatrix],
        k: usize,
        psi: &CVector,
        measured: &mut Vec<u8>,
        out: &mut [f64],
    ) {
        if k == 0 {
            let idx = measured
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | b as usize);
            out[idx] += psi.norm_squared();
            return;
        }
        // `measured` holds x_{k+1}, …, x_M: most recent first
        let (zero, one) = round_branches(&powers[k - 1], psi, feedback_angle(measured));
        for (bit, branch) in [(0u8, zero), (1u8, one)] {
            if branch.norm_squared() > 0.0 {
                measured.insert(0, bit);
                recurse(powers, k - 1, &branch, measured, out);
                measured.remove(0);
            }
        }
    }
    let mut measured = Vec::new();
    recurse(powers, m, input, &mut measured, &mut out);
    out
}

fn to_cmatrix(u: &Unitary2<f64>) -> CMatrix {
    CMatrix::from_row_slice(2, 2, u.entries())
}

/// Compiled `R_z(θ)` with its global phase aligned to the exact rotation.
fn compiled_rz(synth: &Synthesizer<'_, f64>, theta: f64, eps: f64) -> Result<CMatrix> {
    let target = rz(theta)?;
    let approx = crate::gate_algebra::seq_to_matrix::<f64>(&synth.compile_rz(theta, eps)?.seq);
    let overlap = (target.adjoint() * approx).trace();
    let aligned = approx.scale(Complex64::from_polar(1.0, -overlap.arg()));
    Ok(to_cmatrix(&aligned))
}

fn embed_pair(n: usize, j: usize, g: &CMatrix) -> CMatrix {
    let left = CMatrix::identity(1 << j, 1 << j);
    let right = CMatrix::identity(1 << (n - j - 2), 1 << (n - j - 2));
    left.kronecker(g).kronecker(&right)
}

/// Trotter step `U_x(θ)·U_zz(2θ)·U_x(θ)` assembled from SK-compiled z-rotations:
/// `exp(iθX/2) = H·R_z(−θ)·H` per site and `exp(iθZZ) = CNOT·(I ⊗ R_z(−2θ))·CNOT` per bond.
pub fn compiled_trotter_step(
    n: usize,
    theta: f64,
    eps: f64,
    net: &BaseNet<f64>,
) -> Result<CMatrix> {
    if !(2..=MAX_SK_SPINS).contains(&n) {
        return Err(Error::limit(
            Stage::Simulation,
            "max_sk_spins",
            format!("spin count {n} outside 2..={MAX_SK_SPINS} for trotter_sk"),
        ));
    }
    let synth = Synthesizer::new(net);
    let h = to_cmatrix(&crate::gate_algebra::Gate::H.matrix());
    let rx = &h * compiled_rz(&synth, -theta, eps)? * &h;
    let x_layer = (1..n).fold(rx.clone(), |acc, _| acc.kronecker(&rx));
    let rzz = compiled_rz(&synth, -2.0 * theta, eps)?;
    // 4×4 CNOT·(I⊗R)·CNOT: |a,b⟩ ↦ Σ_c R[c, a⊕b] |a, a⊕c⟩
    let mut g = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                g[((a << 1) | (a ^ c), (a << 1) | b)] = rzz[(c, a ^ b)];
            }
        }
    }
    let mut zz = CMatrix::identity(1 << n, 1 << n);
    for j in 0..n - 1 {
        zz = embed_pair(n, j, &g) * zz;
    }
    Ok(&x_layer * zz * &x_layer)
}

fn check_config(cfg: &IpeaConfig) -> Result<()> {
    if cfg.bits == 0 || cfg.bits > MAX_BITS {
        return Err(Error::limit(
            Stage::Simulation,
            "max_bits",
            format!("M = {} outside 1..={MAX_BITS}", cfg.bits),
        ));
    }
    let cap = match cfg.mode {
        OracleMode::TrotterSk => MAX_SK_SPINS,
        _ => MAX_UNITARY_SPINS,
    };
    let name = match cfg.mode {
        OracleMode::TrotterSk => "max_sk_spins",
        _ => "max_unitary_spins",
    };
    if cfg.n < 2 || cfg.n > cap {
        return Err(Error::limit(
            Stage::Simulation,
            name,
            format!("N = {} outside 2..={cap} for {} mode", cfg.n, cfg.mode),
        ));
    }
    if !(cfg.tau.is_finite() && cfg.tau > 0.0) {
        return Err(Error::invalid(Stage::Simulation, "tau must be positive"));
    }
    if let InputState::Depolarized { overlap } = cfg.input {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(Error::invalid(
                Stage::Simulation,
                "overlap must lie in [0, 1]",
            ));
        }
    }
    Ok(())
}

/// `U^{2^m}` for `m = 0 … M−1` under the configured oracle, plus the `k₀` used (if any).
pub fn oracle_powers(
    cfg: &IpeaConfig,
    net: Option<&BaseNet<f64>>,
) -> Result<(Vec<CMatrix>, Option<u64>)> {
    check_config(cfg)?;
    let m = cfg.bits;
    match cfg.mode {
        OracleMode::Exact => {
            let powers = (0..m)
                .map(|j| exact_evolution(cfg.n, (1u64 << j) as f64 * cfg.tau))
                .collect::<Result<Vec<_>>>()?;
            Ok((powers, None))
        }
        OracleMode::Trotter | OracleMode::TrotterSk => {
            let k0 = match cfg.k0 {
                Some(k) if k >= 1 => k,
                Some(_) => return Err(Error::invalid(Stage::Simulation, "k0 must be at least 1")),
                None => solve_k0(cfg.n, m, cfg.tau, TrotterMode::Exact)?,
            };
            let theta = cfg.tau / k0 as f64;
            let step = if cfg.mode == OracleMode::Trotter {
                trotter_step(cfg.n, theta)?
            } else {
                let net = net.ok_or_else(|| {
                    Error::invalid(Stage::Simulation, "trotter_sk mode needs a base net")
                })?;
                let eps = cfg
                    .sk_eps
                    .unwrap_or_else(|| 0.5f64.powi(m as i32) / k0 as f64);
                compiled_trotter_step(cfg.n, theta, eps, net)?
            };
            let mut powers = Vec::with_capacity(m as usize);
            let mut current = matrix_power(&step, k0);
            for _ in 0..m {
                let next = &current * &current;
                powers.push(current);
                current = next;
            }
            Ok((powers, Some(k0)))
        }
    }
}

fn prepare_input(cfg: &IpeaConfig, rng: &mut ChaCha8Rng) -> Result<CVector> {
    let eig = diagonalize(cfg.n)?;
    let ground = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
        )
        .0;
    let pick = match cfg.input {
        InputState::Ground => ground,
        InputState::Depolarized { overlap } => {
            if rng.random::<f64>() < overlap {
                ground
            } else {
                rng.random_range(0..eig.eigenvalues.len())
            }
        }
    };
    Ok(eig
        .eigenvectors
        .column(pick)
        .map(|x| Complex64::new(x, 0.0)))
}

/// One seeded run of iterative phase estimation on the `N`-spin chain.
pub fn ipea_run(cfg: &IpeaConfig, net: Option<&BaseNet<f64>>) -> Result<IpeaRun> {
    let (powers, k0) = oracle_powers(cfg, net)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let input = prepare_input(cfg, &mut rng)?;
    let trace = run_rounds(&powers, &input, &mut rng);
    let phase = phase_from_bits(&trace.bits);
    Ok(IpeaRun {
        n: cfg.n,
        m: cfg.bits,
        tau: cfg.tau,
        oracle_mode: cfg.mode,
        seed: cfg.seed,
        bits: trace.bits,
        phase_estimate: phase,
        energy_estimate: energy_from_phase(phase, cfg.tau),
        k0,
    })
}
