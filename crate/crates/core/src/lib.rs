//! Rényi entanglement entropy of the ultraviolet-regularized Dirac vacuum
//! restricted to an interval, computed by Nyström discretization of the
//! truncated two-point operator.
//!
//! The crate is organised bottom-up:
//!
//! * [`renyi`]: the entropy functions η_κ, their boundary exponents and the
//!   closed-form area-law coefficient.
//! * [`symbols`]: momentum-space 2×2 symbols of the Dirac Hamiltonian and
//!   the regularized negative-frequency projector.
//! * [`kernel`]: the position-space kernel, by quadrature and by closed forms.
//! * [`discretization`]: quadrature grids and the Hermitian Nyström matrix.
//! * [`schatten`]: singular values, Schatten quasi-norms, randomized
//!   inequality checks.
//! * [`entropy`]: the entropy pipeline (truncated trace minus bulk term).
//! * [`asymptotics`]: ε-sweeps, slope fits and decomposition diagnostics.
//! * [`cli`]: the command-line front end.

// Parameter checks are written as !(x > 0.0) so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bessel;
pub mod cli;
pub mod discretization;
pub mod entropy;
mod error;
pub mod kernel;
pub mod mat2;
pub mod quadrature;
pub mod renyi;
pub mod schatten;
pub mod symbols;

pub use error::{Error, Result};

pub use faer::c64;

/// Version string embedded in every output file.
pub const VERSION: &str = concat!("diamond-entropy ", env!("CARGO_PKG_VERSION"));
