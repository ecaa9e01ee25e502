//! Numerical toolkit for representations of the q-Onsager (tridiagonal)
//! algebra.
//!
//! Two realizations of the fundamental pair `W0`, `W1` are constructed and
//! cross-validated:
//!
//! * the functional representation on symmetric Laurent polynomials, where
//!   `W0` acts as a second-order q-difference operator (Askey-Wilson type)
//!   and `W1` multiplies by `z + 1/z`; polynomial eigenfunctions carry Bethe
//!   roots, and the conserved charge `I1` is diagonalized both in and beyond
//!   its algebraic sector;
//! * the spin-chain representation on `2^N` sites underlying the open XXZ
//!   Hamiltonian with general integrable boundary fields, where the pair
//!   forms a tridiagonal pair and every analytic structure is checked
//!   against brute-force dense diagonalization.

pub mod bethe;
pub mod chain;
pub mod descendants;
pub mod eigen;
pub mod error;
pub mod functional;
pub mod hierarchy;
pub mod laurent;
pub mod matrix;
pub mod scalar;

pub use error::{Error, Result};

/// Default complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Default-precision dense matrix.
pub type Matrix64 = matrix::Matrix<f64>;
/// Default-precision deformation parameter.
pub type QParams64 = scalar::QParams<f64>;
/// Default-precision eigen decomposition.
pub type EigenLadder64 = eigen::EigenLadder<f64>;
