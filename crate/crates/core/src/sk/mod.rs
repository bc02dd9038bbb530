//! Solovay–Kitaev synthesis of z-rotations over {H, S, T}.

mod commutator;
mod net;
mod rewrite;

pub use commutator::{gc_decompose, GC_CONSTANT, GC_MAX_ANGLE};
pub use net::{BaseNet, NetEntry, NetParams, CACHE_MAGIC, CACHE_VERSION};
pub use rewrite::{simplify, simplify_gates};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::gate_algebra::{dist, rz, seq_to_matrix, GateSeq, Unitary2};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkConfig {
    /// Deepest recursion tried before giving up.
    pub depth_cap: usize,
    /// Sequences longer than this abort the search.
    pub max_seq_len: usize,
}

impl Default for SkConfig {
    fn default() -> Self {
        SkConfig {
            depth_cap: 12,
            max_seq_len: 20_000_000,
        }
    }
}

/// A certified approximation of `R_z(target_angle)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledRotation<T> {
    pub target_angle: T,
    pub seq: GateSeq,
    pub achieved_eps: T,
    pub depth: usize,
}

impl<T: Real> CompiledRotation<T> {
    /// Re-multiplies the sequence and returns its distance to the target rotation.
    pub fn verify(&self) -> T {
        let target = rz(self.target_angle).expect("finite target angle");
        dist(&target, &seq_to_matrix(&self.seq))
    }
}

/// Dawson–Nielsen recursion over a fixed base net.
pub struct Synthesizer<'a, T> {
    net: &'a BaseNet<T>,
    config: SkConfig,
}

impl<'a, T: Real> Synthesizer<'a, T> {
    pub fn new(net: &'a BaseNet<T>) -> Self {
        Self::with_config(net, SkConfig::default())
    }

    pub fn with_config(net: &'a BaseNet<T>, config: SkConfig) -> Self {
        Synthesizer { net, config }
    }

    /// Depth-`depth` approximation of `u`.
    pub fn sk(&self, u: &Unitary2<T>, depth: usize) -> Result<GateSeq> {
        let base = self.net.nearest(u).0.clone();
        let mut current = base;
        for level in 1..=depth {
            current = self.refine(u, &current, level)?;
        }
        Ok(current)
    }

    // One level of the recursion: given the depth-(n−1) approximation `prev` of `u`, correct
    // the residual `u·prev†` with a group commutator of depth-(n−1) approximations.
    fn refine(&self, u: &Unitary2<T>, prev: &GateSeq, depth: usize) -> Result<GateSeq> {
        let prev_m: Unitary2<T> = seq_to_matrix(prev);
        let residual = *u * prev_m.adjoint();
        let (v, w) = gc_decompose(&residual)?;
        let vs = self.sk(&v, depth - 1)?;
        let ws = self.sk(&w, depth - 1)?;
        // circuit order: prev, W†, V†, W, V  ⇒  matrix V·W·V†·W†·prev
        let len = prev.len() + 2 * (vs.len() + ws.len());
        if len > self.config.max_seq_len {
            return Err(Error::limit(
                Stage::Synthesis,
                "max_seq_len",
                format!("depth {depth} sequence would hold {len} gates"),
            ));
        }
        let mut gates = Vec::with_capacity(len);
        gates.extend_from_slice(&prev.gates);
        gates.extend(ws.adjoint().gates);
        gates.extend(vs.adjoint().gates);
        gates.extend_from_slice(&ws.gates);
        gates.extend_from_slice(&vs.gates);
        Ok(GateSeq::new(simplify_gates(&gates)))
    }

    /// Shallowest depth whose re-verified distance to `R_z(theta)` is at most `eps`.
    ///
    /// The angle is reduced to `(−π, π]` (a shift by 2π only flips the global sign); a
    /// negative angle is compiled as the adjoint of its positive counterpart, so `θ` and
    /// `−θ` always get sequences with identical counts.
    pub fn compile_rz(&self, theta: T, eps: T) -> Result<CompiledRotation<T>> {
        if !(eps > T::zero()) {
            return Err(Error::invalid(Stage::Synthesis, "eps must be positive"));
        }
        let target = rz(theta)?;
        let two_pi = T::TAU();
        let mut reduced = theta % two_pi;
        if reduced > T::PI() {
            reduced = reduced - two_pi;
        } else if reduced <= -T::PI() {
            reduced = reduced + two_pi;
        }
        let flip = reduced < T::zero();
        let canon = rz(reduced.abs())?;

        let finish = |seq: &GateSeq| if flip { seq.adjoint() } else { seq.clone() };
        let mut seq = self.net.nearest(&canon).0.clone();
        let mut best = T::infinity();
        for depth in 0..=self.config.depth_cap {
            if depth > 0 {
                seq = self.refine(&canon, &seq, depth)?;
            }
            let out = finish(&seq);
            let achieved = dist(&target, &seq_to_matrix(&out));
            if achieved <= eps {
                return Ok(CompiledRotation {
                    target_angle: theta,
                    seq: out,
                    achieved_eps: achieved,
                    depth,
                });
            }
            best = best.min(achieved);
        }
        Err(Error::Convergence {
            stage: Stage::Synthesis,
            msg: format!(
                "R_z({theta}) not within eps {eps} after depth {}; best achieved {best}",
                self.config.depth_cap
            ),
        })
    }
}

/// [`Synthesizer::compile_rz`] with the default configuration.
pub fn compile_rz<T: Real>(theta: T, eps: T, net: &BaseNet<T>) -> Result<CompiledRotation<T>> {
    Synthesizer::new(net).compile_rz(theta, eps)
}

/// [`Synthesizer::sk`] with the default configuration.
pub fn sk<T: Real>(u: &Unitary2<T>, depth: usize, net: &BaseNet<T>) -> Result<GateSeq> {
    Synthesizer::new(net).sk(u, depth)
}
