//! Single-qubit gate algebra: 2×2 unitaries, the logical basis gates, z-rotations and the
//! phase-invariant operator distance.
//!
//! Ordering convention: in a [`GateSeq`] the gate at index 0 is applied first, so the
//! sequence `[g0, g1, ..., gn]` has matrix `gn · ... · g1 · g0`. Everything in this crate
//! (synthesis, adjoints, cache files) relies on that single convention.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::scalar::Real;

/// Absolute max-entry tolerance used for matrix identities.
pub const MATRIX_TOL: f64 = 1e-12;

/// A logical basis gate label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gate {
    I,
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Y,
    Z,
}

impl Gate {
    pub const ALL: [Gate; 9] = [
        Gate::I,
        Gate::H,
        Gate::S,
        Gate::Sdg,
        Gate::T,
        Gate::Tdg,
        Gate::X,
        Gate::Y,
        Gate::Z,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Sdg => "S†",
            Gate::T => "T",
            Gate::Tdg => "T†",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
        }
    }

    /// The gate whose matrix is the exact adjoint of this one.
    pub fn inverse(self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            g => g,
        }
    }

    pub fn is_pauli(self) -> bool {
        matches!(self, Gate::I | Gate::X | Gate::Y | Gate::Z)
    }

    /// Power of T for gates diagonal in the computational basis (`T^k`, exact, k mod 8).
    pub fn t_power(self) -> Option<u8> {
        match self {
            Gate::I => Some(0),
            Gate::T => Some(1),
            Gate::S => Some(2),
            Gate::Z => Some(4),
            Gate::Sdg => Some(6),
            Gate::Tdg => Some(7),
            _ => None,
        }
    }

    pub fn matrix<T: Real>(self) -> Unitary2<T> {
        let z = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        let r = T::FRAC_1_SQRT_2();
        let w = Complex::from_polar(T::one(), T::FRAC_PI_4());
        let m = match self {
            Gate::I => [one, z, z, one],
            Gate::H => {
                let h = Complex::new(r, T::zero());
                [h, h, h, -h]
            }
            Gate::S => [one, z, z, i],
            Gate::Sdg => [one, z, z, -i],
            Gate::T => [one, z, z, w],
            Gate::Tdg => [one, z, z, w.conj()],
            Gate::X => [z, one, one, z],
            Gate::Y => [z, -i, i, z],
            Gate::Z => [one, z, z, -one],
        };
        Unitary2 { m }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I" => Gate::I,
            "H" => Gate::H,
            "S" => Gate::S,
            "S†" | "Sdg" | "SDG" | "sdg" => Gate::Sdg,
            "T" => Gate::T,
            "T†" | "Tdg" | "TDG" | "tdg" => Gate::Tdg,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            other => {
                return Err(Error::invalid(
                    Stage::Gates,
                    format!("unknown gate label `{other}`"),
                ))
            }
        })
    }
}

/// A 2×2 complex matrix, row-major. Constructed values are unitary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unitary2<T> {
    m: [Complex<T>; 4],
}

impl<T: Real> Unitary2<T> {
    pub fn identity() -> Self {
        Gate::I.matrix()
    }

    /// Builds a matrix from row-major entries, rejecting non-unitary input.
    pub fn from_entries(entries: [Complex<T>; 4]) -> Result<Self> {
        let u = Unitary2 { m: entries };
        let tol = T::lit(1e-10);
        if entries
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::invalid(Stage::Gates, "non-finite matrix entry"));
        }
        if u.unitarity_defect() > tol {
            return Err(Error::invalid(
                Stage::Gates,
                format!("matrix is not unitary (defect {})", u.unitarity_defect()),
            ));
        }
        Ok(u)
    }

    pub fn entries(&self) -> &[Complex<T>; 4] {
        &self.m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.m[2 * row + col]
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.m;
        Unitary2 {
            m: [a.conj(), c.conj(), b.conj(), d.conj()],
        }
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0] + self.m[3]
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Unitary2 {
            m: self.m.map(|x| x * s),
        }
    }

    /// Max-entry magnitude of `U·U† − I`.
    pub fn unitarity_defect(&self) -> T {
        let p = *self * self.adjoint();
        let id = Self::identity();
        p.max_abs_diff(&id)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Projection onto SU(2): divides by a square root of the determinant and picks the
    /// sign with non-negative real trace, so that near-identity inputs stay near `I`.
    pub fn to_su2(&self) -> Self {
        let s = self.det().sqrt();
        let mut u = self.scale(s.inv());
        if u.trace().re < T::zero() {
            u = u.scale(Complex::new(-T::one(), T::zero()));
        }
        u
    }

    /// Rotation angle in `[0, π]` and unit axis of the SU(2) projection. The axis of the
    /// identity is reported as +z.
    pub fn axis_angle(&self) -> (T, [T; 3]) {
        let u = self.to_su2();
        // U = cos(θ/2) I − i sin(θ/2) n·σ
        let a = (u.m[0] + u.m[3].conj()) * T::lit(0.5);
        let b = (u.m[2] - u.m[1].conj()) * T::lit(0.5);
        let sx = -b.im;
        let sy = b.re;
        let sz = -a.im;
        let s = (sx * sx + sy * sy + sz * sz).sqrt();
        let c = a.re;
        let theta = T::lit(2.0) * s.atan2(c);
        if s == T::zero() {
            return (theta, [T::zero(), T::zero(), T::one()]);
        }
        (theta, [sx / s, sy / s, sz / s])
    }

    /// `exp(−iθ n·σ/2)` for a unit axis `n`.
    pub fn rotation(axis: [T; 3], theta: T) -> Self {
        let half = theta * T::lit(0.5);
        let (s, c) = half.sin_cos();
        let [nx, ny, nz] = axis;
        let m = [
            Complex::new(c, -s * nz),
            Complex::new(-s * ny, -s * nx),
            Complex::new(s * ny, -s * nx),
            Complex::new(c, s * nz),
        ];
        Unitary2 { m }
    }
}

impl<T: Real> Mul for Unitary2<T> {
    type Output = Unitary2<T>;

    fn mul(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = rhs.m;
        Unitary2 {
            m: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h],
        }
    }
}

/// Standard matrix for a gate label (`I, H, S, S†, T, T†, X, Y, Z`).
pub fn basis_gate<T: Real>(label: &str) -> Result<Unitary2<T>> {
    Ok(label.parse::<Gate>()?.matrix())
}

/// `R_z(θ) = diag(e^{−iθ/2}, e^{+iθ/2})`.
pub fn rz<T: Real>(theta: T) -> Result<Unitary2<T>> {
    if !theta.is_finite() {
        return Err(Error::invalid(
            Stage::Gates,
            "rotation angle must be finite",
        ));
    }
    Ok(Unitary2::rotation([T::zero(), T::zero(), T::one()], theta))
}

pub fn rx<T: Real>(theta: T) -> Unitary2<T> {
    Unitary2::rotation([T::one(), T::zero(), T::zero()], theta)
}

pub fn ry<T: Real>(theta: T) -> Unitary2<T> {
    Unitary2::rotation([T::zero(), T::one(), T::zero()], theta)
}

/// Global-phase-invariant spectral distance `min_φ ‖A − e^{iφ}B‖₂`.
///
/// With `W = A†B` having eigenphases separated by `δ ∈ [0, π]`, the minimum equals
/// `2 sin(δ/4)`. `δ/2` is read off the SU(2) part of `W` through `atan2`, which keeps full
/// relative precision for nearly equal arguments.
pub fn dist<T: Real>(a: &Unitary2<T>, b: &Unitary2<T>) -> T {
    let w = a.adjoint() * *b;
    let s = w.det().sqrt();
    let w = w.scale(s.inv());
    let x = (w.m[0] + w.m[3].conj()) * T::lit(0.5);
    let y = (w.m[2] - w.m[1].conj()) * T::lit(0.5);
    let sin_half = (x.im * x.im + y.norm_sqr()).sqrt();
    let cos_half = x.re.abs();
    let half = sin_half.atan2(cos_half);
    T::lit(2.0) * (half * T::lit(0.5)).sin()
}

/// Gate counts entering the per-rotation cycle cost.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateCounts {
    #[serde(rename = "N_H")]
    pub n_h: u64,
    #[serde(rename = "N_S")]
    pub n_s: u64,
    #[serde(rename = "N_T")]
    pub n_t: u64,
}

impl GateCounts {
    pub fn new(n_h: u64, n_s: u64, n_t: u64) -> Self {
        GateCounts { n_h, n_s, n_t }
    }

    pub fn total(&self) -> u64 {
        self.n_h + self.n_s + self.n_t
    }

    /// Cycle cost with unit code distance (11.25 per T, 10 per S, 2.5 per H).
    pub fn unit_cost(&self) -> f64 {
        11.25 * self.n_t as f64 + 10.0 * self.n_s as f64 + 2.5 * self.n_h as f64
    }
}

/// An ordered gate list (index 0 applied first) with its normalized counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateSeq {
    pub gates: Vec<Gate>,
    pub counts: GateCounts,
}

impl GateSeq {
    /// Wraps a gate list and fills in its counts.
    pub fn new(gates: Vec<Gate>) -> Self {
        let counts = count_gates(&gates);
        GateSeq { gates, counts }
    }

    pub fn empty() -> Self {
        GateSeq::default()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Sequence for the adjoint: reversed order, each gate inverted.
    pub fn adjoint(&self) -> GateSeq {
        GateSeq::new(self.gates.iter().rev().map(|g| g.inverse()).collect())
    }

    /// `self` followed by `next` (so `next` is applied after `self`).
    pub fn then(&self, next: &GateSeq) -> GateSeq {
        let mut gates = Vec::with_capacity(self.len() + next.len());
        gates.extend_from_slice(&self.gates);
        gates.extend_from_slice(&next.gates);
        GateSeq::new(gates)
    }

    /// Parses a whitespace-separated label list; `-` or an empty string is the empty sequence.
    pub fn parse(s: &str) -> Result<GateSeq> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(GateSeq::empty());
        }
        let gates = s
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Gate>>>()?;
        Ok(GateSeq::new(gates))
    }

    /// Space-separated labels using ASCII names (`Sdg`, `Tdg`), `-` when empty.
    pub fn to_ascii(&self) -> String {
        if self.gates.is_empty() {
            return "-".to_string();
        }
        self.gates
            .iter()
            .map(|g| match g {
                Gate::Sdg => "Sdg",
                Gate::Tdg => "Tdg",
                g => g.label(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for GateSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.gates.iter().map(|g| g.label()).collect();
        write!(f, "[{}]", labels.join(", "))
    }
}

fn count_gates(gates: &[Gate]) -> GateCounts {
    let mut c = GateCounts::default();
    for g in gates {
        match g {
            Gate::H => c.n_h += 1,
            Gate::S | Gate::Sdg => c.n_s += 1,
            Gate::T | Gate::Tdg => c.n_t += 1,
            Gate::I | Gate::X | Gate::Y | Gate::Z => {}
        }
    }
    c
}

/// Recomputes counts from the gate list, leaving the list itself untouched.
pub fn normalize_counts(seq: &GateSeq) -> GateSeq {
    GateSeq {
        gates: seq.gates.clone(),
        counts: count_gates(&seq.gates),
    }
}

/// Ordered product of a sequence (index 0 applied first).
pub fn seq_to_matrix<T: Real>(seq: &GateSeq) -> Unitary2<T> {
    gates_to_matrix(&seq.gates)
}

pub fn gates_to_matrix<T: Real>(gates: &[Gate]) -> Unitary2<T> {
    gates
        .iter()
        .fold(Unitary2::identity(), |acc, g| g.matrix() * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type U = Unitary2<f64>;

    fn g(l: &str) -> U {
        basis_gate(l).unwrap()
    }

    #[test]
    fn basic_identities() {
        assert!((g("S") * g("S")).max_abs_diff(&g("Z")) < MATRIX_TOL);
        assert!((g("T") * g("T")).max_abs_diff(&g("S")) < MATRIX_TOL);
        assert!((g("H") * g("H")).max_abs_diff(&U::identity()) < MATRIX_TOL);
        assert!((g("T") * g("T†")).max_abs_diff(&U::identity()) < MATRIX_TOL);
        assert!((g("S†") * g("S")).max_abs_diff(&U::identity()) < MATRIX_TOL);
    }

    #[test]
    fn unknown_label_rejected() {
        assert!(basis_gate::<f64>("CNOT").is_err());
        assert!(GateSeq::parse("H Q").is_err());
    }

    #[test]
    fn all_basis_gates_unitary() {
        for gate in Gate::ALL {
            let u: U = gate.matrix();
            assert!(u.unitarity_defect() < MATRIX_TOL, "{gate}");
            assert!((u.det().norm() - 1.0).abs() < MATRIX_TOL, "{gate}");
            assert!(
                (gate.matrix::<f64>() * gate.inverse().matrix()).max_abs_diff(&U::identity())
                    < MATRIX_TOL
            );
        }
    }

    #[test]
    fn rz_examples() {
        assert!(rz(0.0).unwrap().max_abs_diff(&U::identity()) < MATRIX_TOL);
        assert!(dist(&rz(PI / 4.0).unwrap(), &g("T")) < 1e-12);
        assert!(dist(&rz(PI).unwrap(), &g("Z")) < 1e-12);
        assert!(rz(f64::NAN).is_err());
        assert!(rz(f64::INFINITY).is_err());
    }

    #[test]
    fn seq_examples() {
        let hh = GateSeq::parse("H H").unwrap();
        assert!(seq_to_matrix::<f64>(&hh).max_abs_diff(&U::identity()) < MATRIX_TOL);
        let tt = GateSeq::parse("T T").unwrap();
        assert!(dist(&seq_to_matrix(&tt), &g("S")) < 1e-12);
        // H T H = e^{iπ/8} R_x(π/4)
        let hth = GateSeq::parse("H T H").unwrap();
        let expect = rx(PI / 4.0).scale(Complex::from_polar(1.0, PI / 8.0));
        assert!(seq_to_matrix::<f64>(&hth).max_abs_diff(&expect) < MATRIX_TOL);
    }

    #[test]
    fn application_order_is_circuit_order() {
        // [S, H]: S first, then H, so the matrix is H·S.
        let seq = GateSeq::parse("S H").unwrap();
        let expect = g("H") * g("S");
        assert!(seq_to_matrix::<f64>(&seq).max_abs_diff(&expect) < MATRIX_TOL);
        assert!(seq_to_matrix::<f64>(&seq).max_abs_diff(&(g("S") * g("H"))) > 0.1);
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist(&g("H"), &g("H")), 0.0);
        assert!((dist(&U::identity(), &g("Z")) - 2f64.sqrt()).abs() < 1e-14);
        assert!((dist(&U::identity(), &g("T")) - 2.0 * (PI / 16.0).sin()).abs() < 1e-14);
        assert!((dist(&U::identity(), &g("T")) - 0.3902).abs() < 1e-4);
    }

    #[test]
    fn dist_is_phase_invariant_and_symmetric() {
        let a = g("H") * g("T");
        let b = a.scale(Complex::from_polar(1.0, 0.77));
        assert!(dist(&a, &b) < 1e-14);
        let c = g("T") * g("H") * g("S");
        assert!((dist(&a, &c) - dist(&c, &a)).abs() < 1e-15);
    }

    #[test]
    fn count_normalization() {
        let seq = GateSeq::parse("T T† S† H Z").unwrap();
        assert_eq!(seq.counts, GateCounts::new(1, 1, 2));
        assert_eq!(GateSeq::parse("").unwrap().counts, GateCounts::default());
        assert_eq!(
            GateSeq::parse("X Y Z").unwrap().counts,
            GateCounts::default()
        );
        let stale = GateSeq {
            gates: seq.gates.clone(),
            counts: GateCounts::new(9, 9, 9),
        };
        let once = normalize_counts(&stale);
        assert_eq!(once.gates, seq.gates);
        assert_eq!(once.counts, GateCounts::new(1, 1, 2));
        assert_eq!(normalize_counts(&once), once);
    }

    #[test]
    fn axis_angle_round_trip() {
        let axis = [0.48, -0.6, 0.64];
        let u = U::rotation(axis, 1.1);
        let (theta, n) = u.axis_angle();
        assert!((theta - 1.1).abs() < 1e-13);
        for k in 0..3 {
            assert!((n[k] - axis[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn single_precision_works() {
        let t: Unitary2<f32> = Gate::T.matrix();
        let r = rz(std::f32::consts::FRAC_PI_4).unwrap();
        assert!(dist(&t, &r) < 1e-3);
        assert!((dist(&Unitary2::<f32>::identity(), &Gate::Z.matrix()) - 2f32.sqrt()).abs() < 1e-6);
    }
}
