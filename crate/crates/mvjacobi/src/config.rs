//! Numerical tolerances used across the crate.
//!
//! All thresholds live in one record that is passed explicitly through the
//! pipeline; there are no hidden globals. The defaults leave double-precision
//! headroom for chain lengths up to `p ~ 16` at desk-scale block sizes.

/// Tolerance configuration for every operation in the crate.
///
/// Relative thresholds are always applied as `tol * (1 + scale)` where the
/// scale is a norm of the quantity under test, so that exact zeros pass
/// without special-casing.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Hermitian check: `||M - M*||_F <= herm * (1 + ||M||_F)`.
    pub herm: f64,
    /// Orthonormality check on subspace bases.
    pub ortho: f64,
    /// Positive definiteness: minimal eigenvalue must exceed `pd * ||A||_2`.
    pub pd: f64,
    /// Relative residual allowed in factorization round trips.
    pub factorization: f64,
    /// Relative singular-value threshold for kernel and rank decisions.
    pub kernel_rank: f64,
    /// Eigenvalue clustering factor; the gap threshold is
    /// `cluster_factor * (1 + spectral radius)`.
    pub cluster_factor: f64,
    /// Relative threshold below which an off-diagonal block or an evaluation
    /// denominator counts as numerically singular.
    pub singular: f64,
    /// Relative singular-value margin for the tameness decision (applied to
    /// the stacked system matrix whose Gram matrix is the moment Hankel
    /// matrix).
    pub tame: f64,
    /// Frobenius tolerance on `sum_j P_j g_j^{-1} P_j - I`.
    pub residue_sum: f64,
    /// Tolerance on the moment defects of a measure representation.
    pub moment: f64,
    /// Relative guard distance around poles of rational matrix functions.
    pub pole_guard: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-10,
            ortho: 1e-10,
            pd: 1e-12,
            factorization: 1e-10,
            kernel_rank: 1e-8,
            cluster_factor: 1e-7,
            singular: 1e-12,
            tame: 1e-8,
            residue_sum: 1e-8,
            moment: 1e-8,
            pole_guard: 1e-12,
        }
    }
}

impl Tolerances {
    /// Absolute gap threshold used to split eigenvalue clusters.
    pub fn cluster_tol(&self, spectral_radius: f64) -> f64 {
        self.cluster_factor * (1.0 + spectral_radius)
    }
}
