//! Error type shared by all computational modules.

use crate::C64;

/// Errors surfaced by the spectral pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix required to be Hermitian is not, beyond tolerance.
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    /// A matrix required to be positive definite has a nonpositive (or
    /// below-threshold) eigenvalue.
    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    /// An off-diagonal block is numerically singular; the three-term
    /// recurrence cannot be advanced.
    #[error("off-diagonal block a_{index} is numerically singular")]
    SingularBlock { index: usize },

    /// A Weyl-function denominator is numerically singular, i.e. the
    /// evaluation point sits on the spectrum.
    #[error("evaluation point {z} is numerically at an eigenvalue")]
    AtEigenvalue { z: C64 },

    /// An eigenvalue cluster and the kernel of the terminal polynomial
    /// disagree about the multiplicity.
    #[error(
        "eigenvalue cluster at {lambda} has size {cluster} but kernel dimension {kernel}; \
         check the clustering tolerance"
    )]
    MultiplicityMismatch {
        lambda: f64,
        cluster: usize,
        kernel: usize,
    },

    /// A spectral weight is numerically singular on its own range.
    #[error("weight at eigenvalue {lambda} is numerically singular on its range")]
    SingularWeight { lambda: f64 },

    /// The residue map of the inverted terminal polynomial is singular. This
    /// cannot happen for a valid operator and signals an internal
    /// inconsistency in the inputs.
    #[error("residue map at eigenvalue {lambda} is singular; inputs are inconsistent")]
    SingularY { lambda: f64 },

    /// Evaluation requested within the guard distance of a pole.
    #[error("evaluation point {z} is within the guard distance of the pole at {pole}")]
    NearPole { z: C64, pole: f64 },

    /// Block Lanczos lost rank before completing all stages. For data that
    /// satisfies the admissibility checks this never happens; rank loss at
    /// stage `n` means the input system is not tame.
    #[error(
        "block Lanczos broke down at stage {stage}: residual Gram matrix has rank {rank} < {expected} \
         (spectral data is not tame)"
    )]
    LanczosBreakdown {
        stage: usize,
        rank: usize,
        expected: usize,
    },

    /// Structural or class-membership violation in an operator.
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// Structural violation in spectral data.
    #[error("invalid spectral data: {0}")]
    InvalidSpectralData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
