//! Direct and inverse spectral problems for finite matrix-valued Jacobi operators.
//!
//! A block Jacobi operator is a self-adjoint block-tridiagonal matrix with
//! Hermitian diagonal blocks `b_1, ..., b_p` and nonsingular off-diagonal
//! blocks `a_1, ..., a_{p-1}`, each of size `m x m`. Two normalizations of the
//! off-diagonal blocks are supported: Hermitian positive definite (`Splus`)
//! and lower triangular with positive diagonal (`Lplus`). For either class the
//! map from coefficients to spectral data
//!
//! ```text
//! (a, b)  <-->  { (lambda_j, P_j, g_j) }
//! ```
//!
//! is a bijection, where `lambda_j` are the eigenvalues, `P_j` the orthogonal
//! projectors onto the kernels of the terminal polynomial solution, and `g_j`
//! the positive weight operators on those kernels. This crate implements both
//! directions:
//!
//! * [`spectral::forward_map`] computes the spectral data of an operator;
//! * [`inverse::inverse_map`] reconstructs the operator from spectral data by
//!   block Lanczos tridiagonalization of the associated discrete matrix
//!   measure.
//!
//! Supporting machinery includes the polynomial solutions of the three-term
//! recurrence and their Wronskian identities ([`operator`]), the
//! Weyl-Titchmarsh matrix function and its pole/residue form ([`spectral`]),
//! the tameness criterion characterizing admissible spectral data ([`tame`]),
//! the Herglotz decomposition of the inverted Weyl function ([`inverse`]), and
//! JSON persistence plus seeded instance generation ([`io`]).
//!
//! All numerics are dense double precision; problem sizes are expected to stay
//! in the `m*p <= few hundred` range. Tolerances are collected in a single
//! [`Tolerances`] record passed explicitly to every operation that needs one.
//!
//! ```
//! use mvjacobi::inverse::inverse_map;
//! use mvjacobi::io::gen_operator;
//! use mvjacobi::operator::Flavor;
//! use mvjacobi::spectral::forward_map;
//! use mvjacobi::tame::validate_sp;
//! use mvjacobi::Tolerances;
//!
//! let tols = Tolerances::default();
//! let op = gen_operator(2, 3, Flavor::Splus, 7, &tols);
//! let data = forward_map(&op, &tols)?;
//! assert!(validate_sp(&data, &tols).ok);
//!
//! // Reconstruction in either class reproduces an operator with the same
//! // spectral data; for the generating class it is the operator itself.
//! let rebuilt = inverse_map(&data, Flavor::Splus, &tols)?;
//! let defect: f64 = (0..op.len())
//!     .map(|n| (rebuilt.diag_block(n) - op.diag_block(n)).norm())
//!     .fold(0.0, f64::max);
//! assert!(defect < 1e-10);
//! # Ok::<(), mvjacobi::Error>(())
//! ```

pub mod config;
pub mod error;
pub mod inverse;
pub mod io;
pub mod matrixcore;
pub mod operator;
pub mod spectral;
pub mod tame;

pub use config::Tolerances;
pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix, the carrier type for all blocks.
pub type CMatrix = nalgebra::DMatrix<C64>;
