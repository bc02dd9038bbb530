//! Balanced group-commutator factorization `U = V·W·V†·W†`.

use crate::error::{Error, Result, Stage};
use crate::gate_algebra::{rx, ry, Unitary2};
use crate::scalar::Real;

/// Largest rotation angle accepted by [`gc_decompose`].
pub const GC_MAX_ANGLE: f64 = std::f64::consts::FRAC_PI_2;

/// `dist(V, I)` and `dist(W, I)` are at most `GC_CONSTANT · sqrt(dist(U, I))` for every
/// accepted input. The ratio tends to `1/√2` for small angles and reaches about 0.75 at
/// [`GC_MAX_ANGLE`].
pub const GC_CONSTANT: f64 = 0.8;

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Rotation taking unit vector `from` onto unit vector `to`.
fn aligning_rotation<T: Real>(from: [T; 3], to: [T; 3]) -> Unitary2<T> {
    let c = cross(from, to);
    let s = dot(c, c).sqrt();
    let cos = dot(from, to);
    if s <= T::lit(1e-15) {
        if cos > T::zero() {
            return Unitary2::identity();
        }
        // antiparallel: half turn about any axis orthogonal to `from`
        let trial = if from[0].abs() < T::lit(0.9) {
            [T::one(), T::zero(), T::zero()]
        } else {
            [T::zero(), T::one(), T::zero()]
        };
        let p = cross(from, trial);
        let n = dot(p, p).sqrt();
        return Unitary2::rotation(p.map(|x| x / n), T::PI());
    }
    Unitary2::rotation(c.map(|x| x / s), s.atan2(cos))
}

/// Factors a rotation by angle `θ` into a commutator of two rotations by angle `φ`, where
/// `sin²(φ/2) = sin(θ/4)` (equivalently `sin(θ/2) = 2 sin²(φ/2) sqrt(1 − sin⁴(φ/2))`).
///
/// `U` is first projected onto SU(2) with the sign closest to the identity; the identity
/// `V·W·V†·W† = U` is exact for such inputs and holds up to global phase otherwise.
pub fn gc_decompose<T: Real>(u: &Unitary2<T>) -> Result<(Unitary2<T>, Unitary2<T>)> {
    let (theta, axis) = u.axis_angle();
    if !theta.is_finite() {
        return Err(Error::invalid(Stage::Synthesis, "non-finite rotation"));
    }
    if theta > T::lit(GC_MAX_ANGLE) {
        return Err(Error::invalid(
            Stage::Synthesis,
            format!("rotation angle {theta} exceeds the group-commutator limit {GC_MAX_ANGLE}"),
        ));
    }
    if theta == T::zero() {
        return Ok((Unitary2::identity(), Unitary2::identity()));
    }
    let phi = T::lit(2.0) * (theta * T::lit(0.25)).sin().sqrt().asin();
    let v0 = rx(phi);
    let w0 = ry(phi);
    let c = v0 * w0 * v0.adjoint() * w0.adjoint();
    let (_, c_axis) = c.axis_angle();
    let s = aligning_rotation(c_axis, axis);
    let sd = s.adjoint();
    Ok((s * v0 * sd, s * w0 * sd))
}
