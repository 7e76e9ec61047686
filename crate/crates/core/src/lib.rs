//! Evolution of time-dependent non-Hermitian Hamiltonians
//! `H(t) = 2ω(t) K0 + 2α(t) K- + 2β(t) K+` built from su(1,1) or su(2)
//! generators.
//!
//! A time-dependent non-unitary map `V(t)`, written in the ordered form
//! `exp(ϑ+ K+) exp(ln ϑ0 K0) exp(ϑ- K-)`, is steered by a small auxiliary ODE
//! system so that the transformed Hamiltonian `V H V⁻¹ + i V̇ V⁻¹` reduces to
//! a real multiple of `K0`. Exact states then follow as
//! `ψ_n(t) = e^{-i λ_n ∫ g} V⁻¹(t) |n>`, and every closed-form result is
//! checked against direct numerical propagation in [`oracle`].
//!
//! Module map:
//! - [`algebra`]: generator matrices and commutation checks
//! - [`model`]: coefficient profiles and `H(t)`
//! - [`decomposition`]: `V`, its factorization and reduced parameters
//! - [`flow`]: the constraint ODEs and their initialization
//! - [`transform`]: transformed coefficients `W, Q, Y` and residual scans
//! - [`solution`]: closed-form states, phase law, metric inner product
//! - [`oracle`]: direct propagation and the constant-coefficient spectrum
//! - [`cli`]: JSON run configs and the `decompose/flow/evolve/verify/spectrum` commands

// `!(x >= lo)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod solution;
pub mod transform;

pub use error::{Error, Result};
