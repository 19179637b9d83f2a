//! The block Jacobi operator, its polynomial solutions, and the
//! Weyl-Titchmarsh function hierarchy.
//!
//! An operator is described by Hermitian diagonal blocks `b_1..b_p` and
//! nonsingular off-diagonal blocks `a_1..a_{p-1}`; the dense form is the
//! `mp x mp` Hermitian block tridiagonal matrix with `a_n` on the
//! superdiagonal and `a_n*` on the subdiagonal. The boundary convention
//! `a_0 = a_p = I` is hard-coded into every recurrence in this module.
//!
//! The fundamental solutions of the three-term recurrence
//!
//! ```text
//! a_n y_{n+1} + b_n y_n + a_{n-1}* y_{n-1} = z y_n ,   n = 1..p
//! ```
//!
//! are the matrix polynomials `phi` (pinned at the left end: `phi_0 = 0`,
//! `phi_1 = I`) and `chi` (pinned at the right end: `chi_{p+1} = 0`,
//! `chi_p = I`). Their z-derivatives satisfy the differentiated recurrence
//! and are propagated alongside when requested, which keeps them exact up to
//! roundoff; no finite differencing is involved.

use crate::matrixcore::{is_hermitian, is_lower_triangular_positive, singular_values};
use crate::{C64, CMatrix, Error, Result, Tolerances};

/// Off-diagonal block normalization class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Hermitian positive definite off-diagonal blocks.
    Splus,
    /// Lower triangular off-diagonal blocks with positive real diagonal.
    Lplus,
    /// No class constraint beyond nonsingularity.
    General,
}

impl Flavor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flavor::Splus => "splus",
            Flavor::Lplus => "lplus",
            Flavor::General => "general",
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "splus" | "s+" => Ok(Flavor::Splus),
            "lplus" | "l+" => Ok(Flavor::Lplus),
            "general" => Ok(Flavor::General),
            other => Err(format!("unknown flavor `{other}` (expected splus|lplus|general)")),
        }
    }
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finite matrix-valued Jacobi operator.
#[derive(Debug, Clone)]
pub struct BlockJacobiOperator {
    block_size: usize,
    len: usize,
    diag: Vec<CMatrix>,
    offdiag: Vec<CMatrix>,
    flavor: Flavor,
}

impl BlockJacobiOperator {
    /// Validates and wraps coefficient sequences.
    ///
    /// `diag` holds `b_1..b_p` (Hermitian), `offdiag` holds `a_1..a_{p-1}`
    /// (nonsingular, and in the class demanded by `flavor`).
    pub fn new(
        diag: Vec<CMatrix>,
        offdiag: Vec<CMatrix>,
        flavor: Flavor,
        tols: &Tolerances,
    ) -> Result<Self> {
        let p = diag.len();
        if p == 0 {
            return Err(Error::InvalidOperator("empty diagonal sequence".into()));
        }
        if offdiag.len() + 1 != p {
            return Err(Error::InvalidOperator(format!(
                "expected {} off-diagonal blocks for length {p}, got {}",
                p - 1,
                offdiag.len()
            )));
        }
        let m = diag[0].nrows();
        if m == 0 {
            return Err(Error::InvalidOperator("zero block size".into()));
        }
        for (idx, block) in diag.iter().chain(offdiag.iter()).enumerate() {
            if block.nrows() != m || block.ncols() != m {
                return Err(Error::InvalidOperator(format!(
                    "block {idx} is {}x{}, expected {m}x{m}",
                    block.nrows(),
                    block.ncols()
                )));
            }
            if block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidOperator(format!(
                    "block {idx} contains non-finite entries"
                )));
            }
        }
        for (idx, b) in diag.iter().enumerate() {
            if !is_hermitian(b, tols.herm) {
                return Err(Error::InvalidOperator(format!(
                    "diagonal block b_{} is not Hermitian",
                    idx + 1
                )));
            }
        }
        for (idx, a) in offdiag.iter().enumerate() {
            let sv = singular_values(a);
            let max = sv.first().copied().unwrap_or(0.0);
            let min = sv.last().copied().unwrap_or(0.0);
            if max == 0.0 || min <= tols.singular * max {
                return Err(Error::InvalidOperator(format!(
                    "off-diagonal block a_{} is singular",
                    idx + 1
                )));
            }
            match flavor {
                Flavor::Splus => {
                    if !is_hermitian(a, tols.herm) {
                        return Err(Error::InvalidOperator(format!(
                            "flavor splus requires Hermitian a_{}",
                            idx + 1
                        )));
                    }
                    let (vals, _) = crate::matrixcore::hermitian_eigen(a);
                    let max_abs = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
                    if vals.first().copied().unwrap_or(0.0) <= tols.pd * max_abs {
                        return Err(Error::InvalidOperator(format!(
                            "flavor splus requires positive definite a_{}",
                            idx + 1
                        )));
                    }
                }
                Flavor::Lplus => {
                    if !is_lower_triangular_positive(a, tols.herm) {
                        return Err(Error::InvalidOperator(format!(
                            "flavor lplus requires lower-triangular positive a_{}",
                            idx + 1
                        )));
                    }
                }
                Flavor::General => {}
            }
        }
        Ok(BlockJacobiOperator {
            block_size: m,
            len: p,
            diag,
            offdiag,
            flavor,
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Chain length `p` (number of diagonal blocks).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Diagonal block `b_{n+1}` (zero-based index).
    pub fn diag_block(&self, n: usize) -> &CMatrix {
        &self.diag[n]
    }

    /// Off-diagonal block `a_{n+1}` (zero-based index).
    pub fn offdiag_block(&self, n: usize) -> &CMatrix {
        &self.offdiag[n]
    }

    pub fn diag_blocks(&self) -> &[CMatrix] {
        &self.diag
    }

    pub fn offdiag_blocks(&self) -> &[CMatrix] {
        &self.offdiag
    }

    /// `a_n` under the boundary convention: `a_0 = a_p = I`, otherwise the
    /// stored block (here `n` is the mathematical 1-based index).
    pub fn offdiag_ext(&self, n: usize) -> CMatrix {
        assert!(n <= self.len, "off-diagonal index {n} out of range");
        if n == 0 || n == self.len {
            CMatrix::identity(self.block_size, self.block_size)
        } else {
            self.offdiag[n - 1].clone()
        }
    }

    /// Dense `mp x mp` Hermitian form.
    pub fn assemble_dense(&self) -> CMatrix {
        let m = self.block_size;
        let p = self.len;
        let mut dense = CMatrix::zeros(m * p, m * p);
        for n in 0..p {
            dense
                .view_mut((n * m, n * m), (m, m))
                .copy_from(&self.diag[n]);
            if n + 1 < p {
                dense
                    .view_mut((n * m, (n + 1) * m), (m, m))
                    .copy_from(&self.offdiag[n]);
                dense
                    .view_mut(((n + 1) * m, n * m), (m, m))
                    .copy_from(&self.offdiag[n].adjoint());
            }
        }
        dense
    }

    /// The operator with the first level removed: blocks `b_2..b_p` and
    /// `a_2..a_{p-1}`. Returns `None` when `p = 1`.
    pub fn truncate_first_level(&self) -> Option<Self> {
        if self.len == 1 {
            return None;
        }
        Some(BlockJacobiOperator {
            block_size: self.block_size,
            len: self.len - 1,
            diag: self.diag[1..].to_vec(),
            offdiag: self.offdiag[1..].to_vec(),
            flavor: self.flavor,
        })
    }

    /// Evaluates the left-pinned solution `phi` at `z`; optionally carries
    /// the z-derivatives along the recurrence.
    pub fn eval_phi(&self, z: C64, with_derivs: bool) -> Result<SolutionEval> {
        let m = self.block_size;
        let p = self.len;
        let id = CMatrix::identity(m, m);
        let mut values = Vec::with_capacity(p + 2);
        values.push(CMatrix::zeros(m, m));
        values.push(id.clone());
        let mut derivs = with_derivs.then(|| vec![CMatrix::zeros(m, m), CMatrix::zeros(m, m)]);

        for n in 1..=p {
            let zb = &id * z - &self.diag[n - 1];
            let prev_adj = if n >= 2 {
                self.offdiag[n - 2].adjoint()
            } else {
                id.clone()
            };
            let rhs = &zb * &values[n] - &prev_adj * &values[n - 1];
            let next = self.solve_forward(n, rhs)?;
            if let Some(ders) = derivs.as_mut() {
                let rhs_d = &zb * &ders[n] + &values[n] - &prev_adj * &ders[n - 1];
                let next_d = self.solve_forward(n, rhs_d)?;
                ders.push(next_d);
            }
            values.push(next);
        }
        Ok(SolutionEval {
            z,
            kind: SolutionKind::Phi,
            values,
            derivs,
        })
    }

    /// Evaluates the right-pinned solution `chi` at `z`.
    pub fn eval_chi(&self, z: C64, with_derivs: bool) -> Result<SolutionEval> {
        let m = self.block_size;
        let p = self.len;
        let id = CMatrix::identity(m, m);
        let mut values = vec![CMatrix::zeros(m, m); p + 2];
        values[p + 1] = CMatrix::zeros(m, m);
        values[p] = id.clone();
        let mut derivs = with_derivs.then(|| vec![CMatrix::zeros(m, m); p + 2]);

        for n in (1..=p).rev() {
            let zb = &id * z - &self.diag[n - 1];
            let a_n = self.offdiag_ext(n);
            let rhs = &zb * &values[n] - &a_n * &values[n + 1];
            let prev = self.solve_backward(n, rhs)?;
            if let Some(ders) = derivs.as_mut() {
                let rhs_d = &zb * &ders[n] + &values[n] - &a_n * &ders[n + 1];
                let prev_d = self.solve_backward(n, rhs_d)?;
                ders[n - 1] = prev_d;
            }
            values[n - 1] = prev;
        }
        Ok(SolutionEval {
            z,
            kind: SolutionKind::Chi,
            values,
            derivs,
        })
    }

    /// Solves `a_n x = rhs` (with `a_p = I`).
    fn solve_forward(&self, n: usize, rhs: CMatrix) -> Result<CMatrix> {
        if n == self.len {
            return Ok(rhs);
        }
        self.offdiag[n - 1]
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularBlock { index: n })
    }

    /// Solves `a_{n-1}* x = rhs` (with `a_0 = I`).
    fn solve_backward(&self, n: usize, rhs: CMatrix) -> Result<CMatrix> {
        if n == 1 {
            return Ok(rhs);
        }
        self.offdiag[n - 2]
            .adjoint()
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularBlock { index: n - 1 })
    }

    /// The Weyl-Titchmarsh function `M(z) = -chi_1(z) chi_0(z)^{-1}`.
    ///
    /// Fails with [`Error::AtEigenvalue`] when `chi_0(z)` is numerically
    /// singular, which happens exactly on the spectrum.
    pub fn weyl_m(&self, z: C64, tols: &Tolerances) -> Result<CMatrix> {
        self.m_level(z, 1, tols)
    }

    /// The n-th function in the Weyl hierarchy,
    /// `M_n(z) = -chi_n(z) [a_{n-1}* chi_{n-1}(z)]^{-1}` for `n` in
    /// `1..=p+1`; `n = 1` is the Weyl function itself and `n = p+1` is zero.
    pub fn m_level(&self, z: C64, n: usize, tols: &Tolerances) -> Result<CMatrix> {
        assert!(
            (1..=self.len + 1).contains(&n),
            "level {n} out of range 1..={}",
            self.len + 1
        );
        let chi = self.eval_chi(z, false)?;
        let denom = self.offdiag_ext(n - 1).adjoint() * &chi.values[n - 1];
        let sv = singular_values(&denom);
        let max = sv.first().copied().unwrap_or(0.0);
        let min = sv.last().copied().unwrap_or(0.0);
        if max == 0.0 || min <= tols.singular * max {
            return Err(Error::AtEigenvalue { z });
        }
        let inv = denom
            .lu()
            .solve(&CMatrix::identity(self.block_size, self.block_size))
            .ok_or(Error::AtEigenvalue { z })?;
        Ok(-(&chi.values[n] * inv))
    }
}

/// Which endpoint a solution is pinned at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    /// Left-pinned: `values[0] = 0`, `values[1] = I`.
    Phi,
    /// Right-pinned: `values[p+1] = 0`, `values[p] = I`.
    Chi,
}

/// Values (and optionally z-derivatives) of a fundamental solution at one
/// point, for indices `0..=p+1`.
#[derive(Debug, Clone)]
pub struct SolutionEval {
    pub z: C64,
    pub kind: SolutionKind,
    pub values: Vec<CMatrix>,
    pub derivs: Option<Vec<CMatrix>>,
}

impl SolutionEval {
    /// Maximal residual of the three-term recurrence over `n = 1..p`,
    /// normalized by the magnitude of the data entering it.
    pub fn recurrence_residual(&self, op: &BlockJacobiOperator) -> f64 {
        let p = op.len();
        let id = CMatrix::identity(op.block_size(), op.block_size());
        let scale = 1.0
            + self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
                * (self.z.norm()
                    + op.diag_blocks().iter().map(|b| b.norm()).fold(0.0, f64::max)
                    + 2.0 * op
                        .offdiag_blocks()
                        .iter()
                        .map(|a| a.norm())
                        .fold(1.0, f64::max));
        let mut worst = 0.0_f64;
        for n in 1..=p {
            let a_n = op.offdiag_ext(n);
            let a_prev_adj = op.offdiag_ext(n - 1).adjoint();
            let res = &a_n * &self.values[n + 1] + (op.diag_block(n - 1) - &id * self.z) * &self.values[n]
                + &a_prev_adj * &self.values[n - 1];
            worst = worst.max(res.norm());
        }
        worst / scale
    }
}

/// The discrete Wronskian pairing
/// `theta_n*(conj z) a_n eta_{n+1}(z) - theta_{n+1}*(conj z) a_n* eta_n(z)`
/// at index `n` in `0..=p`.
///
/// `theta` must have been evaluated at the conjugate of `eta`'s point. For
/// two solutions of the same recurrence the value does not depend on `n`.
pub fn wronskian(
    op: &BlockJacobiOperator,
    theta: &SolutionEval,
    eta: &SolutionEval,
    n: usize,
) -> CMatrix {
    assert!(n <= op.len(), "Wronskian index {n} out of range");
    let a_n = op.offdiag_ext(n);
    theta.values[n].adjoint() * &a_n * &eta.values[n + 1]
        - theta.values[n + 1].adjoint() * a_n.adjoint() * &eta.values[n]
}
