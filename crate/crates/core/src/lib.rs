//! Resource estimation for fault-tolerant phase estimation of the transverse-field Ising
//! chain.
//!
//! The pipeline runs from single-qubit gate algebra and Solovay–Kitaev synthesis through
//! Trotter error control to surface-code and concatenated-code cost models. A state-vector
//! simulator of iterative phase estimation validates the algorithm at small sizes.
//!
//! Gate algebra, synthesis and the closed-form cost formulas are generic over the scalar
//! type (`f32` or `f64`); the dense Hamiltonian, simulator and estimator pipelines run in
//! `f64`. The aliases below fix the usual double-precision instantiations.

pub mod concat_cost;
pub mod error;
pub mod gate_algebra;
pub mod phase_estimation;
pub mod scalar;
pub mod sk;
pub mod surface_cost;
pub mod tim_model;

pub use error::{Error, Result, Stage};
pub use scalar::Real;

pub type Unitary2d = gate_algebra::Unitary2<f64>;
pub type Unitary2f = gate_algebra::Unitary2<f32>;
pub type BaseNetD = sk::BaseNet<f64>;
pub type BaseNetF = sk::BaseNet<f32>;
pub type CompiledRotationD = sk::CompiledRotation<f64>;
pub type SynthesizerD<'a> = sk::Synthesizer<'a, f64>;
