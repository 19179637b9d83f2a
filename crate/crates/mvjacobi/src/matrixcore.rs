//! Dense complex matrix kernels the rest of the crate builds on.
//!
//! Everything here is plain `DMatrix<Complex<f64>>` plumbing: Hermitian
//! checks, the positive square root, the lower-triangular positive Cholesky
//! factor, and numerical kernel/rank extraction. Sizes are small (a few
//! hundred at most), so all decisions go through full eigen/SVD
//! decompositions rather than anything iterative.

use crate::{C64, CMatrix, Error, Result, Tolerances};
use nalgebra::DVector;

/// Frobenius-norm deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

/// Whether `a` is Hermitian within `tol * (1 + ||a||_F)`.
pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && hermitian_defect(a) <= tol * (1.0 + a.norm())
}

/// The Hermitian part `(a + a*) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Deviation of `a` from the lower-triangular-positive class: the largest of
/// the strict upper-triangle moduli, the imaginary parts on the diagonal, and
/// the amount by which any diagonal real part fails to be positive.
pub fn lower_positive_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max(a[(i, j)].norm());
        }
        defect = defect.max(a[(i, i)].im.abs());
        defect = defect.max(-a[(i, i)].re);
    }
    defect
}

/// Whether `a` is lower triangular with real positive diagonal entries,
/// within `tol * (1 + ||a||_F)` (and strictly positive diagonal).
pub fn is_lower_triangular_positive(a: &CMatrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let scale = tol * (1.0 + a.norm());
    lower_positive_defect(a) <= scale && (0..a.nrows()).all(|i| a[(i, i)].re > 0.0)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns the real eigenvalues sorted ascending and the matching unitary
/// eigenvector matrix (eigenvectors in columns). The input is symmetrized
/// first so that roundoff-level Hermitian defects do not leak into the
/// decomposition.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let se = nalgebra::SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let svd = nalgebra::SVD::new(a.clone(), false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Numerical rank: the number of singular values above `rel_tol * sigma_max`.
pub fn rank(a: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(a);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Unique positive square root of a Hermitian positive definite matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when the minimal eigenvalue does
/// not exceed `pd * ||A||_2`, and with [`Error::NotHermitian`] when the input
/// is not Hermitian within tolerance.
pub fn hpd_sqrt(a: &CMatrix, tols: &Tolerances) -> Result<CMatrix> {
    if !is_hermitian(a, tols.herm) {
        return Err(Error::NotHermitian {
            defect: hermitian_defect(a),
        });
    }
    let (values, vectors) = hermitian_eigen(a);
    let max_abs = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let min = values.first().copied().unwrap_or(0.0);
    if min <= tols.pd * max_abs {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    let sqrt_diag = CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|v| C64::new(v.sqrt(), 0.0)),
    ));
    Ok(hermitian_part(&(&vectors * sqrt_diag * vectors.adjoint())))
}

/// Unique lower-triangular factor with positive diagonal of a Hermitian
/// positive definite matrix: returns `a` with `a a* = A`.
///
/// The factor is built by peeling one row/column at a time: with
/// `A = [[B, C*], [C, D]]` and `a = [[b, 0], [c, d]]` the equations are
/// `b^2 = B`, `c b = C`, `d d* = D - C C* / B`, and the trailing block
/// recurses on the (m-1)-sized Schur complement.
pub fn cholesky_lplus(a: &CMatrix, tols: &Tolerances) -> Result<CMatrix> {
    if !is_hermitian(a, tols.herm) {
        return Err(Error::NotHermitian {
            defect: hermitian_defect(a),
        });
    }
    // Decide definiteness up front on the actual spectrum, so failure reports
    // the true minimal eigenvalue rather than a collapsed pivot.
    let (values, _) = hermitian_eigen(a);
    let max_abs = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let min = values.first().copied().unwrap_or(0.0);
    if min <= tols.pd * max_abs {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    let n = a.nrows();
    let mut factor = CMatrix::zeros(n, n);
    lplus_recurse(&hermitian_part(a), &mut factor, 0, tols.pd * max_abs)?;
    Ok(factor)
}

fn lplus_recurse(
    block: &CMatrix,
    out: &mut CMatrix,
    offset: usize,
    pd_floor: f64,
) -> Result<()> {
    let n = block.nrows();
    if n == 0 {
        return Ok(());
    }
    let head = block[(0, 0)].re;
    if head <= pd_floor {
        return Err(Error::NotPositiveDefinite { min_eig: head });
    }
    let pivot = head.sqrt();
    out[(offset, offset)] = C64::new(pivot, 0.0);
    if n == 1 {
        return Ok(());
    }
    let col = block.view((1, 0), (n - 1, 1)) / C64::new(pivot, 0.0);
    for i in 0..n - 1 {
        out[(offset + 1 + i, offset)] = col[(i, 0)];
    }
    let trailing = block.view((1, 1), (n - 1, n - 1)) - &col * col.adjoint();
    lplus_recurse(&trailing, out, offset + 1, pd_floor)
}

/// A subspace of `C^n` carried by an orthonormal basis in columns.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: CMatrix,
}

impl Subspace {
    /// Builds a subspace from a basis matrix whose columns must be
    /// orthonormal within `tols.ortho`.
    pub fn new(basis: CMatrix, tols: &Tolerances) -> Result<Self> {
        let k = basis.ncols();
        let gram_defect = (basis.adjoint() * &basis - CMatrix::identity(k, k)).norm();
        if gram_defect > tols.ortho * (1.0 + k as f64) {
            return Err(Error::InvalidSpectralData(format!(
                "subspace basis is not orthonormal (defect {gram_defect:.3e})"
            )));
        }
        Ok(Subspace {
            ambient: basis.nrows(),
            basis,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// The orthogonal projector onto the subspace, `basis * basis*`.
    pub fn projector(&self) -> CMatrix {
        hermitian_part(&(&self.basis * self.basis.adjoint()))
    }
}

/// Orthonormal basis of the numerical kernel of `a`.
///
/// Kernel directions are the right singular vectors whose singular values are
/// at most `rel_tol * sigma_max`; a zero matrix yields the full space. Works
/// for rectangular inputs (the kernel lives in `C^{ncols}`).
pub fn kernel_basis(a: &CMatrix, rel_tol: f64) -> Subspace {
    kernel_basis_with_scale(a, rel_tol, 0.0)
}

/// Kernel basis with an external magnitude reference.
///
/// The cutoff is `rel_tol * max(sigma_max, scale)`. Needed when `a` is the
/// residual of a larger computation and may be tiny in every entry: for a
/// matrix that is zero up to roundoff, `sigma_max` alone says nothing about
/// which directions are numerically null.
pub fn kernel_basis_with_scale(a: &CMatrix, rel_tol: f64, scale: f64) -> Subspace {
    let cols = a.ncols();
    // Pad with zero rows when the matrix is wide, so the SVD carries a full
    // set of right singular vectors.
    let work = if a.nrows() < cols {
        let mut padded = CMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = nalgebra::SVD::new(work, false, true);
    let v_t = svd.v_t.expect("SVD of a finite matrix did not converge");
    let sigma = &svd.singular_values;
    let max = sigma.iter().fold(0.0_f64, |acc, &s| acc.max(s));
    let cutoff = rel_tol * max.max(scale);
    let kernel_cols: Vec<usize> = (0..sigma.len())
        .filter(|&i| sigma[i] <= cutoff)
        .collect();
    let mut basis = CMatrix::zeros(cols, kernel_cols.len());
    for (dst, &src) in kernel_cols.iter().enumerate() {
        // Right singular vectors are the conjugated rows of V^H.
        let v_col = v_t.row(src).adjoint();
        basis.set_column(dst, &v_col);
    }
    Subspace {
        ambient: cols,
        basis,
    }
}

/// Relative Frobenius distance `||x - y||_F / ||y||_F` (absolute when `y` is
/// the zero matrix).
pub fn relative_error(x: &CMatrix, y: &CMatrix) -> f64 {
    let denom = y.norm();
    let diff = (x - y).norm();
    if denom == 0.0 { diff } else { diff / denom }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cplx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| {
            cplx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn random_hpd(n: usize, seed: u64) -> CMatrix {
        let x = random_matrix(n, seed);
        hermitian_part(&(&x * x.adjoint())) + CMatrix::identity(n, n).scale(0.05)
    }

    fn random_lplus(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                cplx(0.3 + rng.gen::<f64>(), 0.0)
            } else if i > j {
                cplx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            } else {
                cplx(0.0, 0.0)
            }
        })
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let tols = Tolerances::default();
        let id = CMatrix::identity(3, 3);
        assert_eq!(cholesky_lplus(&id, &tols).unwrap(), id);

        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(4.0, 0.0),
            cplx(9.0, 0.0),
        ]));
        let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(2.0, 0.0),
            cplx(3.0, 0.0),
        ]));
        assert!((cholesky_lplus(&diag, &tols).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn cholesky_two_by_two_worked_case() {
        // [[2,1],[1,1]]: the peeling gives b = sqrt(2), c = 1/sqrt(2),
        // d = sqrt(1 - 1/2).
        let tols = Tolerances::default();
        let a = CMatrix::from_row_slice(2, 2, &[
            cplx(2.0, 0.0),
            cplx(1.0, 0.0),
            cplx(1.0, 0.0),
            cplx(1.0, 0.0),
        ]);
        let low = cholesky_lplus(&a, &tols).unwrap();
        let s2 = 2.0_f64.sqrt();
        assert!((low[(0, 0)] - cplx(s2, 0.0)).norm() < 1e-14);
        assert!(low[(0, 1)].norm() < 1e-14);
        assert!((low[(1, 0)] - cplx(1.0 / s2, 0.0)).norm() < 1e-14);
        assert!((low[(1, 1)] - cplx(1.0 / s2, 0.0)).norm() < 1e-14);
        assert!(relative_error(&(&low * low.adjoint()), &a) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let tols = Tolerances::default();
        let a = CMatrix::from_row_slice(2, 2, &[
            cplx(1.0, 0.0),
            cplx(0.0, 0.0),
            cplx(0.0, 0.0),
            cplx(-1.0, 0.0),
        ]);
        match cholesky_lplus(&a, &tols) {
            Err(Error::NotPositiveDefinite { min_eig }) => assert!(min_eig < 0.0),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_rejects_non_hermitian() {
        let tols = Tolerances::default();
        let a = CMatrix::from_row_slice(2, 2, &[
            cplx(1.0, 0.0),
            cplx(1.0, 0.0),
            cplx(0.0, 0.0),
            cplx(1.0, 0.0),
        ]);
        assert!(matches!(
            cholesky_lplus(&a, &tols),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_identity_and_diagonal() {
        let tols = Tolerances::default();
        let id = CMatrix::identity(4, 4);
        assert!((hpd_sqrt(&id, &tols).unwrap() - &id).norm() < 1e-14);

        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(4.0, 0.0),
            cplx(9.0, 0.0),
        ]));
        let root = hpd_sqrt(&diag, &tols).unwrap();
        assert!(relative_error(&(&root * &root), &diag) < 1e-13);
        assert!((root[(0, 0)] - cplx(2.0, 0.0)).norm() < 1e-13);
        assert!((root[(1, 1)] - cplx(3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn sqrt_two_by_two_case() {
        let tols = Tolerances::default();
        let a = CMatrix::from_row_slice(2, 2, &[
            cplx(2.0, 0.0),
            cplx(1.0, 0.0),
            cplx(1.0, 0.0),
            cplx(2.0, 0.0),
        ]);
        let root = hpd_sqrt(&a, &tols).unwrap();
        assert!(is_hermitian(&root, 1e-12));
        assert!((&root * &root - &a).norm() < 1e-12);
    }

    #[test]
    fn kernel_of_zero_and_identity() {
        let tols = Tolerances::default();
        let zero = CMatrix::zeros(2, 2);
        let full = kernel_basis(&zero, tols.kernel_rank);
        assert_eq!(full.dim(), 2);
        assert_eq!(full.ambient_dim(), 2);

        let id = CMatrix::identity(2, 2);
        assert_eq!(kernel_basis(&id, tols.kernel_rank).dim(), 0);

        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(1.0, 0.0),
            cplx(0.0, 0.0),
        ]));
        let ker = kernel_basis(&diag, tols.kernel_rank);
        assert_eq!(ker.dim(), 1);
        // span{e_2}
        assert!(ker.basis()[(0, 0)].norm() < 1e-12);
        assert!((ker.basis()[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        // 1x3 row matrix: kernel is 2-dimensional.
        let a = CMatrix::from_row_slice(1, 3, &[cplx(1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0)]);
        let ker = kernel_basis(&a, 1e-8);
        assert_eq!(ker.dim(), 2);
        assert!((&a * ker.basis()).norm() < 1e-12);
    }

    #[test]
    fn projector_examples() {
        let tols = Tolerances::default();
        let e1 = CMatrix::from_row_slice(2, 1, &[cplx(1.0, 0.0), cplx(0.0, 0.0)]);
        let p = Subspace::new(e1, &tols).unwrap().projector();
        assert!((p[(0, 0)] - cplx(1.0, 0.0)).norm() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);

        let diag_vec = CMatrix::from_row_slice(2, 1, &[
            cplx(1.0 / 2.0_f64.sqrt(), 0.0),
            cplx(1.0 / 2.0_f64.sqrt(), 0.0),
        ]);
        let p = Subspace::new(diag_vec, &tols).unwrap().projector();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - cplx(0.5, 0.0)).norm() < 1e-14);
            }
        }

        let full = kernel_basis(&CMatrix::zeros(3, 3), tols.kernel_rank);
        assert!((full.projector() - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn rank_thresholding() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(1.0, 0.0),
            cplx(1e-3, 0.0),
            cplx(1e-12, 0.0),
        ]));
        assert_eq!(rank(&a, 1e-8), 2);
        assert_eq!(rank(&CMatrix::zeros(3, 3), 1e-8), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn factorization_round_trips(n in 1usize..=6, seed in any::<u64>()) {
            let tols = Tolerances::default();
            let a = random_hpd(n, seed);
            let low = cholesky_lplus(&a, &tols).unwrap();
            prop_assert!(is_lower_triangular_positive(&low, tols.herm));
            prop_assert!(relative_error(&(&low * low.adjoint()), &a) < tols.factorization);
            let root = hpd_sqrt(&a, &tols).unwrap();
            prop_assert!(relative_error(&(&root * &root), &a) < tols.factorization);
        }

        #[test]
        fn lplus_factor_is_unique(n in 1usize..=6, seed in any::<u64>()) {
            let tols = Tolerances::default();
            let low = random_lplus(n, seed);
            let recovered = cholesky_lplus(&(&low * low.adjoint()), &tols).unwrap();
            prop_assert!(relative_error(&recovered, &low) < tols.factorization);
        }

        #[test]
        fn kernel_projector_annihilates(n in 1usize..=6, k in 0usize..=3, seed in any::<u64>()) {
            // Build a matrix with a kernel of dimension exactly min(k, n).
            let k = k.min(n);
            let x = random_matrix(n, seed);
            let (_, vectors) = hermitian_eigen(&hermitian_part(&(&x * x.adjoint())));
            let mut diag = CMatrix::zeros(n, n);
            for i in k..n {
                diag[(i, i)] = C64::new(1.0 + i as f64, 0.0);
            }
            let m = &vectors * diag * vectors.adjoint();
            let ker = kernel_basis(&m, 1e-8);
            prop_assert_eq!(ker.dim(), k);
            let proj = ker.projector();
            prop_assert!((&m * &proj).norm() <= 1e-9 * (1.0 + m.norm()));
        }
    }
}
