//! Open-chain transverse-field Ising model `H = −Σ_j X_j − Σ_j Z_j Z_{j+1}`: dense
//! construction, exact diagonalization, second-order Trotter products and their error.
//!
//! Basis convention: spin 0 is the most significant bit of the basis-state index.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result, Stage};
use crate::scalar::Real;

pub type CMatrix = DMatrix<Complex64>;

/// Largest chain that is materialized as a dense Hamiltonian.
pub const MAX_DENSE_SPINS: usize = 12;
/// Largest chain for which dense unitaries (Trotter products, evolution) are formed.
pub const MAX_UNITARY_SPINS: usize = 8;
/// Default cap on the base Trotter number.
pub const DEFAULT_K0_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone)]
pub struct TimHamiltonian {
    pub n: usize,
    /// Real symmetric in the computational basis.
    pub matrix: DMatrix<f64>,
}

impl TimHamiltonian {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn to_complex(&self) -> CMatrix {
        self.matrix.map(|x| Complex64::new(x, 0.0))
    }
}

fn check_spins(n: usize, cap: usize, limit: &'static str) -> Result<()> {
    if n < 2 || n > cap {
        return Err(Error::limit(
            Stage::Trotter,
            limit,
            format!("spin count {n} outside 2..={cap}"),
        ));
    }
    Ok(())
}

#[inline]
fn spin(state: usize, n: usize, j: usize) -> f64 {
    if (state >> (n - 1 - j)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Diagonal of `Σ_j Z_j Z_{j+1}` over the open chain.
fn zz_diagonal(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| (0..n - 1).map(|j| spin(s, n, j) * spin(s, n, j + 1)).sum())
        .collect()
}

pub fn build_hamiltonian(n: usize) -> Result<TimHamiltonian> {
    check_spins(n, MAX_DENSE_SPINS, "max_dense_spins")?;
    let dim = 1usize << n;
    let zz = zz_diagonal(n);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        h[(s, s)] = -zz[s];
        for j in 0..n {
            h[(s ^ (1 << (n - 1 - j)), s)] -= 1.0;
        }
    }
    Ok(TimHamiltonian { n, matrix: h })
}

/// Eigen-decomposition of the chain Hamiltonian (eigenvalues unsorted).
pub fn diagonalize(n: usize) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    Ok(SymmetricEigen::new(build_hamiltonian(n)?.matrix))
}

pub fn ground_energy_exact(n: usize) -> Result<f64> {
    let eig = diagonalize(n)?;
    Ok(eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min))
}

/// Ground energy together with its (real, normalized) eigenvector.
pub fn ground_state(n: usize) -> Result<(f64, Vec<f64>)> {
    let eig = diagonalize(n)?;
    let (idx, e) =
        eig.eigenvalues
            .iter()
            .cloned()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    Ok((e, eig.eigenvectors.column(idx).iter().cloned().collect()))
}

/// `exp(−iHt)` from the spectral decomposition.
pub fn exact_evolution(n: usize, t: f64) -> Result<CMatrix> {
    check_spins(n, MAX_UNITARY_SPINS, "max_unitary_spins")?;
    let eig = diagonalize(n)?;
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * t));
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(&vd * v.adjoint())
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `U_x(θ) = Π_j exp(iθX_j/2)` as a dense matrix.
pub fn x_layer(n: usize, theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let u = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(0.0, s),
            Complex64::new(0.0, s),
            Complex64::new(c, 0.0),
        ],
    );
    (1..n).fold(u.clone(), |acc, _| kron(&acc, &u))
}

/// Diagonal of `U_zz(θ) = Π_j exp(iθ Z_j Z_{j+1}/2)`.
pub fn zz_layer_diagonal(n: usize, theta: f64) -> Vec<Complex64> {
    zz_diagonal(n)
        .into_iter()
        .map(|z| Complex64::from_polar(1.0, theta * z / 2.0))
        .collect()
}

/// One symmetric step `U_x(θ)·U_zz(2θ)·U_x(θ)`, approximating `exp(−iHθ)`.
pub fn trotter_step(n: usize, theta: f64) -> Result<CMatrix> {
    check_spins(n, MAX_UNITARY_SPINS, "max_unitary_spins")?;
    let ux = x_layer(n, theta);
    let zz = zz_layer_diagonal(n, 2.0 * theta);
    let mut mid = ux.clone();
    for (i, mut row) in mid.row_iter_mut().enumerate() {
        row *= zz[i];
    }
    Ok(&ux * &mid)
}

/// `m^k` by repeated squaring.
pub fn matrix_power(m: &CMatrix, mut k: u64) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `[U_x(θ)U_zz(2θ)U_x(θ)]^k` with `θ = t/k`.
pub fn trotter_product(n: usize, t: f64, k: u64) -> Result<CMatrix> {
    if k == 0 {
        return Err(Error::invalid(Stage::Trotter, "k must be at least 1"));
    }
    Ok(matrix_power(&trotter_step(n, t / k as f64)?, k))
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// `‖exp(−iHt) − trotter_product(n, t, k)‖₂`, no phase quotient.
pub fn trotter_error_exact(n: usize, t: f64, k: u64) -> Result<f64> {
    let exact = exact_evolution(n, t)?;
    let approx = trotter_product(n, t, k)?;
    Ok(spectral_norm(&(exact - approx)))
}

/// Upper bound on `‖[B,[B,A]]‖` for `A = −ΣX_j`, `B = −ΣZ_jZ_{j+1}`.
///
/// `[B,A]` splits into terms `±2i Y_j Z_o` (one per bond and site on it). Each anticommutes
/// with the bonds containing `j`, contributing norm 4, so the total is
/// `4 Σ_j deg(j)² = 16N − 24`.
pub fn nested_commutator_bba(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        16.0 * n as f64 - 24.0
    }
}

/// Upper bound on `‖[A,[A,B]]‖`: each of the `2(N−1)` terms of `[A,B]` anticommutes with
/// two `X` terms, norm 4 each, giving `16(N − 1)`.
pub fn nested_commutator_aab(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        16.0 * (n as f64 - 1.0)
    }
}

/// Second-order commutator bound `(t³/k²)(C₁/12 + C₂/24)` on the Trotter error.
pub fn trotter_error_bound<T: Real>(n: usize, t: T, k: u64) -> T {
    let k = T::from_u64(k).expect("k fits the scalar type");
    let c1 = T::lit(nested_commutator_bba(n));
    let c2 = T::lit(nested_commutator_aab(n));
    t * t * t / (k * k) * (c1 / T::lit(12.0) + c2 / T::lit(24.0))
}

/// How the Trotter error is evaluated when solving for k₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrotterMode {
    Bound,
    Exact,
}

impl TrotterMode {
    /// Exact evaluation where dense unitaries are affordable, the analytic bound beyond.
    pub fn auto(n: usize) -> Self {
        if n <= MAX_UNITARY_SPINS {
            TrotterMode::Exact
        } else {
            TrotterMode::Bound
        }
    }
}

impl std::str::FromStr for TrotterMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bound" => Ok(TrotterMode::Bound),
            "exact" => Ok(TrotterMode::Exact),
            other => Err(Error::invalid(
                Stage::Trotter,
                format!("unknown trotter mode `{other}` (bound|exact)"),
            )),
        }
    }
}

/// Trotter schedule for the controlled `U(2^m τ)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrotterPlan {
    pub m: u32,
    pub tau: f64,
    pub k: u64,
    pub theta: f64,
    pub k0: u64,
}

impl TrotterPlan {
    /// `k = 2^m k₀`, `θ = 2^m τ / k`, which is `τ/k₀` for every `m`.
    pub fn new(m: u32, tau: f64, k0: u64) -> Self {
        let scale = 1u64 << m;
        let k = scale * k0;
        TrotterPlan {
            m,
            tau,
            k,
            theta: scale as f64 * tau / k as f64,
            k0,
        }
    }
}

fn trotter_error(n: usize, t: f64, k: u64, mode: TrotterMode) -> Result<f64> {
    match mode {
        TrotterMode::Bound => Ok(trotter_error_bound(n, t, k)),
        TrotterMode::Exact => trotter_error_exact(n, t, k),
    }
}

/// Smallest `k₀ ≥ 1` with `ε_T(N, τ, k₀) < 2^{−M}`: doubling, then bisection.
pub fn solve_k0(n: usize, bits: u32, tau: f64, mode: TrotterMode) -> Result<u64> {
    solve_k0_capped(n, bits, tau, mode, DEFAULT_K0_CAP)
}

pub fn solve_k0_capped(n: usize, bits: u32, tau: f64, mode: TrotterMode, cap: u64) -> Result<u64> {
    if bits == 0 {
        return Err(Error::invalid(Stage::Trotter, "M must be at least 1"));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid(
            Stage::Trotter,
            "tau must be finite and non-negative",
        ));
    }
    if mode == TrotterMode::Exact {
        check_spins(n, MAX_UNITARY_SPINS, "max_unitary_spins")?;
    }
    let target = 0.5f64.powi(bits as i32);
    let ok = |k: u64| -> Result<bool> { Ok(trotter_error(n, tau, k, mode)? < target) };
    if ok(1)? {
        return Ok(1);
    }
    let mut hi = 1u64;
    loop {
        if hi >= cap {
            return Err(Error::limit(
                Stage::Trotter,
                "k0_cap",
                format!("no k0 ≤ {cap} meets 2^-{bits} (N={n}, tau={tau})"),
            ));
        }
        hi = (hi * 2).min(cap);
        if ok(hi)? {
            break;
        }
    }
    let mut lo = hi / 2; // fails
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli(which: char) -> CMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match which {
            'X' => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            'Z' => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
            'I' => CMatrix::identity(2, 2),
            _ => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        }
    }

    fn op(n: usize, sites: &[(usize, char)]) -> CMatrix {
        let factor = |j: usize| {
            sites
                .iter()
                .find(|(s, _)| *s == j)
                .map(|(_, p)| pauli(*p))
                .unwrap_or_else(|| pauli('I'))
        };
        (1..n).fold(factor(0), |acc, j| acc.kronecker(&factor(j)))
    }

    fn a_term(n: usize) -> CMatrix {
        (0..n).fold(CMatrix::zeros(1 << n, 1 << n), |acc, j| {
            acc - op(n, &[(j, 'X')])
        })
    }

    fn b_term(n: usize) -> CMatrix {
        (0..n - 1).fold(CMatrix::zeros(1 << n, 1 << n), |acc, j| {
            acc - op(n, &[(j, 'Z'), (j + 1, 'Z')])
        })
    }

    fn comm(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a * b - b * a
    }

    #[test]
    fn two_spin_matrix() {
        let h = build_hamiltonian(2).unwrap().matrix;
        let diag: Vec<f64> = (0..4).map(|i| h[(i, i)]).collect();
        assert_eq!(diag, vec![-1.0, 1.0, 1.0, -1.0]);
        for r in 0..4usize {
            for c in 0..4usize {
                if (r ^ c).count_ones() == 1 {
                    assert_eq!(h[(r, c)], -1.0);
                } else if r != c {
                    assert_eq!(h[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn matches_pauli_construction_and_invariants() {
        for n in 2..=6 {
            let h = build_hamiltonian(n).unwrap();
            let reference = a_term(n) + b_term(n);
            assert!((h.to_complex() - &reference).camax() < 1e-12);
            assert!(h.matrix.trace().abs() < 1e-12);
            assert!((&h.matrix - h.matrix.transpose()).amax() < 1e-12);
            let norm = spectral_norm(&h.to_complex());
            assert!(norm <= 2.0 * n as f64 - 1.0 + 1e-12);
        }
        assert!(build_hamiltonian(1).is_err());
        assert!(build_hamiltonian(13).is_err());
    }

    #[test]
    fn two_spin_ground_energy() {
        let e = ground_energy_exact(2).unwrap();
        assert!((e + 5f64.sqrt()).abs() < 1e-12);
    }

    // Power iteration on (σI − H) as an independent route to the smallest eigenvalue.
    fn power_iteration_ground(n: usize) -> f64 {
        let h = build_hamiltonian(n).unwrap().matrix;
        let dim = h.nrows();
        let shift = 2.0 * n as f64;
        let shifted = DMatrix::<f64>::identity(dim, dim) * shift - &h;
        let mut v = nalgebra::DVector::<f64>::from_fn(dim, |i, _| 1.0 + 0.01 * i as f64);
        v /= v.norm();
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let w = &shifted * &v;
            let next = w.dot(&v);
            let norm = w.norm();
            v = w / norm;
            if (next - lambda).abs() < 1e-15 {
                lambda = next;
                break;
            }
            lambda = next;
        }
        shift - lambda
    }

    #[test]
    fn three_spin_ground_energy_two_methods() {
        let a = ground_energy_exact(3).unwrap();
        let b = power_iteration_ground(3);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn energy_per_spin_decreasing() {
        let per: Vec<f64> = (2..=10)
            .map(|n| ground_energy_exact(n).unwrap() / n as f64)
            .collect();
        assert!(per.windows(2).all(|w| w[1] < w[0]), "{per:?}");
        // thermodynamic limit of the critical chain: −4/π
        assert!(per.iter().all(|&e| e > -4.0 / std::f64::consts::PI));
    }

    #[test]
    fn ground_state_is_eigenvector() {
        let (e, v) = ground_state(4).unwrap();
        let h = build_hamiltonian(4).unwrap().matrix;
        let v = nalgebra::DVector::from_vec(v);
        assert!((&h * &v - &v * e).amax() < 1e-10);
    }

    #[test]
    fn trotter_product_basics() {
        let id = trotter_product(3, 0.0, 1).unwrap();
        assert!((id - CMatrix::identity(8, 8)).camax() < 1e-14);
        let u = trotter_product(4, 1.0, 10).unwrap();
        let defect = (&u * u.adjoint() - CMatrix::identity(16, 16)).camax();
        assert!(defect < 1e-10);
        assert!(trotter_product(9, 1.0, 1).is_err());
        assert!(trotter_product(2, 1.0, 0).is_err());
    }

    #[test]
    fn trotter_step_matches_layer_definition() {
        // U_x(θ) = exp(−i A θ/2) with A = −ΣX_j and U_zz(2θ) = exp(−i B θ)
        let n = 3;
        let theta = 0.37;
        let expm_herm = |m: &CMatrix, t: f64| {
            let eig = m.clone().symmetric_eigen();
            let v = eig.eigenvectors;
            let d = CMatrix::from_diagonal(
                &eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * t)),
            );
            &v * d * v.adjoint()
        };
        let a = a_term(n);
        let b = b_term(n);
        let expect = expm_herm(&a, theta / 2.0) * expm_herm(&b, theta) * expm_herm(&a, theta / 2.0);
        assert!((trotter_step(n, theta).unwrap() - expect).camax() < 1e-12);
    }

    #[test]
    fn trotter_error_second_order() {
        assert!(trotter_error_exact(2, 0.0, 4).unwrap() < 1e-14);
        let ks = [8u64, 16, 32, 64];
        let pts: Vec<(f64, f64)> = ks
            .iter()
            .map(|&k| {
                (
                    (k as f64).ln(),
                    trotter_error_exact(2, 1.0, k).unwrap().ln(),
                )
            })
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((-slope - 2.0).abs() <= 0.3, "alpha {}", -slope);
        for n in 2..=4 {
            for k in [16u64, 32, 64] {
                let e = trotter_error_exact(n, 1.0, k).unwrap();
                let e_half = trotter_error_exact(n, 1.0, k / 2).unwrap();
                assert!(e <= e_half);
            }
        }
        let d1 = trotter_error_exact(2, 1.0, 4).unwrap();
        let d2 = trotter_error_exact(2, 1.0, 8).unwrap();
        assert!(d2 < d1);
    }

    #[test]
    fn commutator_constants_bound_brute_force() {
        for n in 2..=6 {
            let a = a_term(n);
            let b = b_term(n);
            let bba = spectral_norm(&comm(&b, &comm(&b, &a)));
            let aab = spectral_norm(&comm(&a, &comm(&a, &b)));
            assert!(nested_commutator_bba(n) + 1e-9 >= bba, "n={n}: {bba}");
            assert!(nested_commutator_aab(n) + 1e-9 >= aab, "n={n}: {aab}");
        }
        // tight for two spins: [B,[B,A]] = 4(X1+X2), [A,[A,B]] = −8(Z1Z2 − Y1Y2)
        let (a, b) = (a_term(2), b_term(2));
        assert!((spectral_norm(&comm(&b, &comm(&b, &a))) - 8.0).abs() < 1e-12);
        assert!((spectral_norm(&comm(&a, &comm(&a, &b))) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn bound_properties() {
        assert_eq!(trotter_error_bound(5, 0.0, 3), 0.0);
        let b8: f64 = trotter_error_bound(5, 1.0, 8);
        let b4: f64 = trotter_error_bound(5, 1.0, 4);
        assert!((b4 / b8 - 4.0).abs() < 1e-12);
        let b32: f32 = trotter_error_bound(5, 1.0f32, 8);
        assert!(((b32 as f64) - b8).abs() < 1e-6);
    }

    #[test]
    fn bound_is_sound_on_small_chains() {
        for n in 2..=6 {
            for t in [0.25, 0.5, 1.0] {
                for k in 4..=64u64 {
                    let exact = trotter_error_exact(n, t, k).unwrap();
                    let bound = trotter_error_bound(n, t, k);
                    assert!(bound >= exact, "n={n} t={t} k={k}: {bound} < {exact}");
                }
            }
        }
    }

    #[test]
    fn k0_examples() {
        // already below the target at k = 1
        assert_eq!(solve_k0(2, 1, 0.01, TrotterMode::Exact).unwrap(), 1);
        let k0 = solve_k0(2, 6, 0.5, TrotterMode::Exact).unwrap();
        let target = 0.5f64.powi(6);
        let scan = (1..)
            .find(|&k| trotter_error_exact(2, 0.5, k).unwrap() < target)
            .unwrap();
        assert_eq!(k0, scan);
        let mut prev = 0;
        for m in 1..=10 {
            let k = solve_k0(3, m, 0.8, TrotterMode::Bound).unwrap();
            assert!(k >= prev);
            prev = k;
        }
        assert!(solve_k0(9, 4, 0.5, TrotterMode::Exact).is_err());
        let err = solve_k0_capped(100, 30, 1.0, TrotterMode::Bound, 1000).unwrap_err();
        assert!(err.to_string().contains("k0_cap"));
    }

    #[test]
    fn plan_theta_independent_of_m() {
        for m in 0..20 {
            let p = TrotterPlan::new(m, 0.3, 7);
            assert_eq!(p.k, (1u64 << m) * 7);
            assert_eq!(p.theta, 0.3 / 7.0);
        }
    }

    #[test]
    fn doubling_k_with_m_keeps_error_scaled() {
        let tau = std::f64::consts::FRAC_PI_4;
        for bits in 1..=8u32 {
            let k0 = solve_k0(2, bits, tau, TrotterMode::Exact).unwrap();
            for m in 0..bits {
                let plan = TrotterPlan::new(m, tau, k0);
                let t = (1u64 << m) as f64 * tau;
                let e = trotter_error_exact(2, t, plan.k).unwrap();
                assert!(e < 0.5f64.powi((bits - m) as i32), "M={bits} m={m}: {e}");
            }
        }
    }
}
