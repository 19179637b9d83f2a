//! JSON persistence for operators and spectral data, and seeded random
//! instance generation.
//!
//! Complex entries are serialized as two-element `[re, im]` arrays and
//! matrices as row-major nested arrays; numbers use the shortest decimal
//! that round-trips binary64, so saving and loading is bit-exact and diffs
//! are reproducible.

use crate::matrixcore::{cholesky_lplus, hermitian_part, hpd_sqrt, rank, singular_values};
use crate::operator::{BlockJacobiOperator, Flavor};
use crate::spectral::{forward_map, SpectralData, SpectralPoint};
use crate::{C64, CMatrix, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Version stamp written into every file.
pub const SCHEMA_VERSION: u32 = 1;

/// Row-major nested array of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

/// Errors from file handling: I/O, JSON syntax (position-annotated by the
/// parser), schema violations, and semantic validation of the decoded data.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: schema error: {detail}")]
    Schema { path: String, detail: String },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: crate::Error,
    },
}

/// On-disk form of a block Jacobi operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorFile {
    pub schema_version: u32,
    pub m: usize,
    pub p: usize,
    pub flavor: String,
    pub b: Vec<MatrixRows>,
    pub a: Vec<MatrixRows>,
}

/// On-disk form of one spectral point; the weight is stored zero-extended
/// (`g = P g P`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralPointFile {
    pub lambda: f64,
    #[serde(rename = "P")]
    pub projector: MatrixRows,
    pub g: MatrixRows,
}

/// On-disk form of spectral data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralFile {
    pub schema_version: u32,
    pub m: usize,
    pub p: usize,
    pub points: Vec<SpectralPointFile>,
}

fn matrix_to_rows(mat: &CMatrix) -> MatrixRows {
    (0..mat.nrows())
        .map(|i| (0..mat.ncols()).map(|j| [mat[(i, j)].re, mat[(i, j)].im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &MatrixRows, size: usize, what: &str) -> Result<CMatrix, String> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(format!("{what}: expected a {size}x{size} matrix"));
    }
    let mat = CMatrix::from_fn(size, size, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
    if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(format!("{what}: non-finite entry"));
    }
    Ok(mat)
}

impl OperatorFile {
    pub fn from_operator(op: &BlockJacobiOperator) -> Self {
        OperatorFile {
            schema_version: SCHEMA_VERSION,
            m: op.block_size(),
            p: op.len(),
            flavor: op.flavor().to_string(),
            b: op.diag_blocks().iter().map(matrix_to_rows).collect(),
            a: op.offdiag_blocks().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn into_operator(self, tols: &Tolerances) -> Result<BlockJacobiOperator, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let flavor: Flavor = self.flavor.parse()?;
        if self.b.len() != self.p {
            return Err(format!("expected {} diagonal blocks, found {}", self.p, self.b.len()));
        }
        if self.a.len() + 1 != self.p {
            return Err(format!(
                "expected {} off-diagonal blocks, found {}",
                self.p - 1,
                self.a.len()
            ));
        }
        let diag = self
            .b
            .iter()
            .enumerate()
            .map(|(i, rows)| rows_to_matrix(rows, self.m, &format!("b[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let offdiag = self
            .a
            .iter()
            .enumerate()
            .map(|(i, rows)| rows_to_matrix(rows, self.m, &format!("a[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        BlockJacobiOperator::new(diag, offdiag, flavor, tols).map_err(|e| e.to_string())
    }
}

impl SpectralFile {
    pub fn from_data(data: &SpectralData) -> Self {
        SpectralFile {
            schema_version: SCHEMA_VERSION,
            m: data.block_size,
            p: data.len,
            points: data
                .points
                .iter()
                .map(|pt| SpectralPointFile {
                    lambda: pt.lambda,
                    projector: matrix_to_rows(&pt.projector),
                    g: matrix_to_rows(&pt.weight),
                })
                .collect(),
        }
    }

    pub fn into_data(self, tols: &Tolerances) -> Result<SpectralData, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, pt)| {
                if !pt.lambda.is_finite() {
                    return Err(format!("points[{i}].lambda: non-finite"));
                }
                let projector = rows_to_matrix(&pt.projector, self.m, &format!("points[{i}].P"))?;
                let weight = rows_to_matrix(&pt.g, self.m, &format!("points[{i}].g"))?;
                // Multiplicity is not stored; it is the projector's rank.
                let multiplicity = rank(&projector, tols.kernel_rank);
                if multiplicity == 0 {
                    return Err(format!("points[{i}].P: zero projector"));
                }
                Ok(SpectralPoint {
                    lambda: pt.lambda,
                    projector,
                    weight,
                    multiplicity,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        SpectralData::new(self.m, self.p, points).map_err(|e| e.to_string())
    }
}

/// Serializes an operator as pretty JSON; deterministic for a given operator.
pub fn operator_to_json(op: &BlockJacobiOperator) -> String {
    serde_json::to_string_pretty(&OperatorFile::from_operator(op))
        .expect("operator serialization cannot fail for finite entries")
}

/// Serializes spectral data as pretty JSON.
pub fn spectral_to_json(data: &SpectralData) -> String {
    serde_json::to_string_pretty(&SpectralFile::from_data(data))
        .expect("spectral serialization cannot fail for finite entries")
}

pub fn save_operator(path: &Path, op: &BlockJacobiOperator) -> Result<(), FileError> {
    std::fs::write(path, operator_to_json(op) + "\n").map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_operator(path: &Path, tols: &Tolerances) -> Result<BlockJacobiOperator, FileError> {
    let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: OperatorFile = serde_json::from_str(&text).map_err(|source| FileError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    file.into_operator(tols).map_err(|detail| FileError::Schema {
        path: path.display().to_string(),
        detail,
    })
}

pub fn save_spectral(path: &Path, data: &SpectralData) -> Result<(), FileError> {
    std::fs::write(path, spectral_to_json(data) + "\n").map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_spectral(path: &Path, tols: &Tolerances) -> Result<SpectralData, FileError> {
    let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: SpectralFile = serde_json::from_str(&text).map_err(|source| FileError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    file.into_data(tols).map_err(|detail| FileError::Schema {
        path: path.display().to_string(),
        detail,
    })
}

/// One draw from the standard normal distribution (Box-Muller).
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Standard complex normal entry: unit expected square modulus.
fn standard_complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let scale = 0.5_f64.sqrt();
    C64::new(standard_normal(rng) * scale, standard_normal(rng) * scale)
}

fn random_complex_matrix<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| standard_complex_normal(rng))
}

/// Generates a random operator, deterministic in the seed.
///
/// Diagonal blocks are Hermitian parts of complex normal matrices. Off-
/// diagonal blocks are square roots of `Y Y* + 0.1 I` in the class demanded
/// by the flavor, which keeps them comfortably nonsingular; for `General`
/// the raw complex normal draw is used (redrawn in the measure-zero event it
/// is numerically singular).
pub fn gen_operator(
    m: usize,
    p: usize,
    flavor: Flavor,
    seed: u64,
    tols: &Tolerances,
) -> BlockJacobiOperator {
    assert!(m >= 1 && p >= 1, "block size and length must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag: Vec<CMatrix> = (0..p)
        .map(|_| hermitian_part(&random_complex_matrix(&mut rng, m)))
        .collect();
    let shift = CMatrix::identity(m, m).scale(0.1);
    let offdiag: Vec<CMatrix> = (0..p.saturating_sub(1))
        .map(|_| match flavor {
            Flavor::Splus => {
                let y = random_complex_matrix(&mut rng, m);
                let gram = hermitian_part(&(&y * y.adjoint())) + &shift;
                hpd_sqrt(&gram, tols).expect("shifted Gram matrix is positive definite")
            }
            Flavor::Lplus => {
                let y = random_complex_matrix(&mut rng, m);
                let gram = hermitian_part(&(&y * y.adjoint())) + &shift;
                cholesky_lplus(&gram, tols).expect("shifted Gram matrix is positive definite")
            }
            Flavor::General => loop {
                let y = random_complex_matrix(&mut rng, m);
                let sv = singular_values(&y);
                if sv.last().copied().unwrap_or(0.0) > 1e-6 * sv[0] {
                    break y;
                }
            },
        })
        .collect();
    BlockJacobiOperator::new(diag, offdiag, flavor, tols)
        .expect("generated blocks satisfy the class constraints")
}

/// Spectral data of a generated operator; a valid element of the
/// admissibility class by construction.
pub fn gen_spectral(m: usize, p: usize, seed: u64, tols: &Tolerances) -> SpectralData {
    let op = gen_operator(m, p, Flavor::Splus, seed, tols);
    forward_map(&op, tols).expect("forward map of a generated operator succeeds")
}
