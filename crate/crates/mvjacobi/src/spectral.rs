//! The forward spectral map and the residue calculus around the Weyl
//! function.
//!
//! For an operator of block size `m` and length `p` the spectral data is the
//! ordered list of triples `(lambda_j, P_j, g_j)`: an eigenvalue, the
//! orthogonal projector onto the kernel of the terminal polynomial
//! `phi_{p+1}(lambda_j)`, and the positive weight obtained by compressing
//! `sum_n phi_n* phi_n` to that kernel. Weights are stored zero-extended as
//! full `m x m` matrices (`g = P g P`), which keeps every identity checkable
//! without carrying kernel bases around.
//!
//! The Weyl function admits the pole expansion `M(z) = -sum_j B_j / (z -
//! lambda_j)` where `B_j` inverts `g_j` on the range of `P_j` and vanishes on
//! the complement; `sum_j B_j = I`. [`residues`] computes that expansion and
//! [`PoleResidueFunction`] evaluates it.

use crate::matrixcore::{hermitian_eigen, hermitian_part, kernel_basis_with_scale};
use crate::operator::BlockJacobiOperator;
use crate::{C64, CMatrix, Error, Result, Tolerances};

/// One point of spectral data: eigenvalue, kernel projector, zero-extended
/// weight, and multiplicity.
#[derive(Debug, Clone)]
pub struct SpectralPoint {
    pub lambda: f64,
    pub projector: CMatrix,
    pub weight: CMatrix,
    pub multiplicity: usize,
}

/// Ordered spectral data of a block Jacobi operator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub block_size: usize,
    pub len: usize,
    pub points: Vec<SpectralPoint>,
}

impl SpectralData {
    /// Structural validation: matrix sizes, finite entries, multiplicity
    /// bounds. Mathematical admissibility is the job of
    /// [`crate::tame::validate_sp`].
    pub fn new(block_size: usize, len: usize, points: Vec<SpectralPoint>) -> Result<Self> {
        if block_size == 0 || len == 0 {
            return Err(Error::InvalidSpectralData(
                "block size and length must be positive".into(),
            ));
        }
        for (idx, pt) in points.iter().enumerate() {
            if !pt.lambda.is_finite() {
                return Err(Error::InvalidSpectralData(format!(
                    "eigenvalue {idx} is not finite"
                )));
            }
            for (name, mat) in [("projector", &pt.projector), ("weight", &pt.weight)] {
                if mat.nrows() != block_size || mat.ncols() != block_size {
                    return Err(Error::InvalidSpectralData(format!(
                        "{name} {idx} is {}x{}, expected {block_size}x{block_size}",
                        mat.nrows(),
                        mat.ncols()
                    )));
                }
                if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidSpectralData(format!(
                        "{name} {idx} contains non-finite entries"
                    )));
                }
            }
            if pt.multiplicity == 0 || pt.multiplicity > block_size {
                return Err(Error::InvalidSpectralData(format!(
                    "multiplicity {} at point {idx} outside 1..={block_size}",
                    pt.multiplicity
                )));
            }
        }
        Ok(SpectralData {
            block_size,
            len,
            points,
        })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Sum of the stored multiplicities.
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|pt| pt.multiplicity).sum()
    }

    /// Largest eigenvalue magnitude (zero for empty data).
    pub fn spectral_radius(&self) -> f64 {
        self.points
            .iter()
            .map(|pt| pt.lambda.abs())
            .fold(0.0, f64::max)
    }
}

/// Splits an ascending list into clusters separated by gaps larger than
/// `gap`; returns (cluster mean, cluster size) pairs.
fn cluster_eigenvalues(sorted: &[f64], gap: f64) -> Vec<(f64, usize)> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > gap {
            let members = &sorted[start..i];
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            clusters.push((mean, members.len()));
            start = i;
        }
    }
    clusters
}

/// The forward spectral map: eigenvalues with multiplicities, kernel
/// projectors of the terminal polynomial, and compressed weights.
///
/// Eigenvalues come from a dense Hermitian eigendecomposition and are grouped
/// into clusters separated by more than `tols.cluster_tol(spectral radius)`.
/// Each cluster size must match the kernel dimension of
/// `phi_{p+1}(lambda_j)`; a mismatch aborts with
/// [`Error::MultiplicityMismatch`] rather than silently repairing.
///
/// The weight `g_j` is the compression of `sum_n phi_n* phi_n` to the kernel.
/// Evaluating that sum literally squares the polynomial growth of the
/// recurrence and loses most of its digits to cancellation for longer
/// chains, so it is computed through the dense eigenvectors instead: every
/// eigenvector is `psi = (phi_n(lambda) v)_n` with `v = psi_1`, hence
/// `||psi||^2 = v* G_j v`, and for the first-block compression
/// `H = (top block rows of V_j)` this reads `H* G_j H = I`. Therefore
/// `g_j = (H H*)^{-1}` on its range, which is backward stable. The literal
/// polynomial sum stays in the test suite as a cross-check at moderate
/// sizes.
pub fn forward_map(op: &BlockJacobiOperator, tols: &Tolerances) -> Result<SpectralData> {
    let m = op.block_size();
    let p = op.len();
    let (evals, evecs) = hermitian_eigen(&op.assemble_dense());
    let radius = evals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let clusters = cluster_eigenvalues(&evals, tols.cluster_tol(radius));

    let mut points = Vec::with_capacity(clusters.len());
    let mut column = 0;
    for &(lambda, size) in &clusters {
        let phi = op.eval_phi(C64::new(lambda, 0.0), false)?;
        // Kernel cutoff relative to the whole solution's magnitude: at an
        // eigenvalue of full multiplicity the terminal value is zero up to
        // roundoff and carries no scale of its own.
        let scale = phi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let kernel = kernel_basis_with_scale(&phi.values[p + 1], tols.kernel_rank, scale);
        if kernel.dim() != size {
            return Err(Error::MultiplicityMismatch {
                lambda,
                cluster: size,
                kernel: kernel.dim(),
            });
        }
        let projector = kernel.projector();
        // First-block compression of the eigenspace basis.
        let head = evecs.view((0, column), (m, size)).clone_owned();
        column += size;
        let residue = hermitian_part(&(&head * head.adjoint()));
        let inverse = restricted_inverse_with(&residue, size, lambda, 1e3 * f64::EPSILON)?;
        let weight = hermitian_part(&(&projector * inverse * &projector));
        points.push(SpectralPoint {
            lambda,
            projector,
            weight,
            multiplicity: size,
        });
    }
    SpectralData::new(m, p, points)
}

/// Inverts a weight on its own range: for a zero-extended weight `g` of rank
/// `k`, returns the matrix acting as `g^{-1}` on the range and as zero on the
/// orthogonal complement.
pub(crate) fn restricted_inverse(
    weight: &CMatrix,
    multiplicity: usize,
    lambda: f64,
    tols: &Tolerances,
) -> Result<CMatrix> {
    restricted_inverse_with(weight, multiplicity, lambda, tols.kernel_rank)
}

fn restricted_inverse_with(
    weight: &CMatrix,
    multiplicity: usize,
    lambda: f64,
    rel_floor: f64,
) -> Result<CMatrix> {
    let m = weight.nrows();
    let (vals, vecs) = hermitian_eigen(weight);
    let max = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if max == 0.0 || multiplicity == 0 || multiplicity > m {
        return Err(Error::SingularWeight { lambda });
    }
    // The top `multiplicity` eigenpairs carry the weight's action on its
    // range; everything below is the zero extension.
    let kept = &vals[m - multiplicity..];
    if kept.iter().any(|&v| v <= rel_floor * max) {
        return Err(Error::SingularWeight { lambda });
    }
    let mut inv = CMatrix::zeros(m, m);
    for (offset, &v) in kept.iter().enumerate() {
        let col = vecs.column(m - multiplicity + offset);
        inv += (col * col.adjoint()) / C64::new(v, 0.0);
    }
    Ok(hermitian_part(&inv))
}

/// A matrix-valued rational function
/// `f(z) = L z + C - sum_s R_s / (z - mu_s)`.
#[derive(Debug, Clone)]
pub struct PoleResidueFunction {
    linear_coeff: Option<CMatrix>,
    const_coeff: Option<CMatrix>,
    poles: Vec<(f64, CMatrix)>,
}

impl PoleResidueFunction {
    /// Validates pole ordering and residue symmetry/positivity within
    /// tolerance.
    pub fn new(
        linear_coeff: Option<CMatrix>,
        const_coeff: Option<CMatrix>,
        poles: Vec<(f64, CMatrix)>,
        tols: &Tolerances,
    ) -> Result<Self> {
        for pair in poles.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidSpectralData(format!(
                    "poles not strictly increasing: {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        for (mu, residue) in &poles {
            let (vals, _) = hermitian_eigen(residue);
            let max = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if vals.first().copied().unwrap_or(0.0) < -tols.herm.sqrt() * (1.0 + max) {
                return Err(Error::InvalidSpectralData(format!(
                    "residue at pole {mu} is not positive semidefinite"
                )));
            }
        }
        Ok(PoleResidueFunction {
            linear_coeff,
            const_coeff,
            poles,
        })
    }

    pub fn linear_coeff(&self) -> Option<&CMatrix> {
        self.linear_coeff.as_ref()
    }

    pub fn const_coeff(&self) -> Option<&CMatrix> {
        self.const_coeff.as_ref()
    }

    pub fn poles(&self) -> &[(f64, CMatrix)] {
        &self.poles
    }

    fn dimension(&self) -> usize {
        self.linear_coeff
            .as_ref()
            .or(self.const_coeff.as_ref())
            .map(|m| m.nrows())
            .or_else(|| self.poles.first().map(|(_, r)| r.nrows()))
            .unwrap_or(0)
    }

    /// Pointwise evaluation. Fails with [`Error::NearPole`] inside the guard
    /// distance `tols.pole_guard * (1 + |mu|)` of any pole.
    pub fn eval(&self, z: C64, tols: &Tolerances) -> Result<CMatrix> {
        let m = self.dimension();
        let mut out = CMatrix::zeros(m, m);
        if let Some(lin) = &self.linear_coeff {
            out += lin * z;
        }
        if let Some(c) = &self.const_coeff {
            out += c;
        }
        for (mu, residue) in &self.poles {
            let denom = z - C64::new(*mu, 0.0);
            if denom.norm() <= tols.pole_guard * (1.0 + mu.abs()) {
                return Err(Error::NearPole { z, pole: *mu });
            }
            out -= residue / denom;
        }
        Ok(out)
    }
}

/// The pole/residue form of the Weyl function attached to spectral data:
/// `M(z) = -sum_j B_j / (z - lambda_j)` with `B_j` the restricted inverse of
/// the weight `g_j`.
pub fn residues(data: &SpectralData, tols: &Tolerances) -> Result<PoleResidueFunction> {
    let mut poles = Vec::with_capacity(data.points.len());
    for pt in &data.points {
        let b = restricted_inverse(&pt.weight, pt.multiplicity, pt.lambda, tols)?;
        poles.push((pt.lambda, b));
    }
    PoleResidueFunction::new(None, None, poles, tols)
}

/// The residue of `phi_{p+1}(z)^{-1}` at `lambda`.
///
/// With `E = Ker phi_{p+1}(lambda)` and `E# = Ker phi_{p+1}(lambda)*`, the
/// residue equals `P Y^{-1} P#` where `Y = P# phi'_{p+1}(lambda) P` maps `E`
/// to `E#` and is invertible for any valid operator; a singular `Y` is
/// reported as an internal-consistency failure. When `lambda` is not an
/// eigenvalue the inverse is analytic there and the residue is zero.
pub fn phi_inverse_residue(
    op: &BlockJacobiOperator,
    lambda: f64,
    tols: &Tolerances,
) -> Result<CMatrix> {
    let m = op.block_size();
    let p = op.len();
    let phi = op.eval_phi(C64::new(lambda, 0.0), true)?;
    let terminal = &phi.values[p + 1];
    let scale = phi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let kernel = kernel_basis_with_scale(terminal, tols.kernel_rank, scale);
    let k = kernel.dim();
    if k == 0 {
        return Ok(CMatrix::zeros(m, m));
    }
    let cokernel = kernel_basis_with_scale(&terminal.adjoint(), tols.kernel_rank, scale);
    if cokernel.dim() != k {
        return Err(Error::SingularY { lambda });
    }
    let derivative = &phi.derivs.as_ref().expect("derivatives requested")[p + 1];
    let small = cokernel.basis().adjoint() * derivative * kernel.basis();
    let sv = crate::matrixcore::singular_values(&small);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 || sv.last().copied().unwrap_or(0.0) <= tols.singular * max {
        return Err(Error::SingularY { lambda });
    }
    let inv = small
        .lu()
        .solve(&CMatrix::identity(k, k))
        .ok_or(Error::SingularY { lambda })?;
    Ok(kernel.basis() * inv * cokernel.basis().adjoint())
}
