//! # lll-core
//!
//! Spectral toolbox for the cubic lowest-Landau-level coefficient flow
//! `i ∂t c_k = T(c)_k` on the Fock–Bargmann basis `φ_n(z) = z^n e^{-|z|²/2} / √(π n!)`.
//!
//! The crate provides:
//! - the coefficient-space state type, conserved quantities, and symmetry
//!   actions ([`fock`]);
//! - the cubic interaction `T(c)` in overflow-free scaled form, the
//!   Hamiltonian, and constrained-energy gradients ([`nonlinear`]);
//! - symplectic/explicit integrators with conservation traces ([`dynamics`]);
//! - closed-form stationary waves and certification ([`catalog`]);
//! - constrained variational solvers and Hessian spectra ([`variational`]);
//! - polynomial zero finding, Jensen counts, growth exponents ([`zeros`]);
//! - linearized stability and bifurcation branches ([`stability`]);
//! - the end-to-end acceptance checks ([`checks`]).
//!
//! Deterministic by construction: every stochastic entry point takes an
//! explicit seed, and the `parallel` feature (rayon) changes scheduling only,
//! never results.

pub mod catalog;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod nonlinear;
pub mod par;
pub mod quadrature;
pub mod sample;
pub mod special;
pub mod stability;
pub mod variational;
pub mod zeros;

pub use error::{CoreError, Result};
pub use num_complex::Complex64;
