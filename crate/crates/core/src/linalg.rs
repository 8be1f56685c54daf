//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Vectorization is column
//! stacking everywhere: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative tolerance for positive-semidefiniteness verdicts.
pub const POSITIVITY_TOL: f64 = 1e-9;

const SIMILARITY_RESIDUAL: f64 = 1e-8;
const SIMILARITY_DET_FLOOR: f64 = 1e-10;
const SIMILARITY_DRAWS: usize = 64;
const SIMILARITY_DENSE_DRAWS: usize = 960;
const SIMILARITY_SEED: u64 = 0x5eed_7a45_0f3b_11c9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e} > {tolerance:.3e})")]
    NonHermitian { deviation: f64, tolerance: f64 },
    #[error("matrix has no entries")]
    Empty,
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("ragged rows: row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("similarity solver found no invertible solution after {attempts} draws (best residual {best_residual:.3e})")]
    SolverFailure { attempts: usize, best_residual: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `max(1, ‖m‖_F)`, the scale every relative tolerance is measured against.
pub fn scale(m: &ComplexMatrix) -> f64 {
    m.norm().max(1.0)
}

/// Absolute positivity tolerance for `m` given a relative factor.
pub fn positivity_tolerance(m: &ComplexMatrix, relative: f64) -> f64 {
    relative * scale(m)
}

/// Builds a matrix from row lists, rejecting ragged and non-finite input.
pub fn matrix_from_rows(rows: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if nrows == 0 || ncols == 0 {
        return Err(LinalgError::Empty);
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(LinalgError::Ragged { row: i, expected: ncols, found: row.len() });
        }
    }
    let m = ComplexMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    check_finite(&m)?;
    Ok(m)
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.is_empty() {
        return Err(LinalgError::Empty);
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.is_empty() {
        return Err(LinalgError::Empty);
    }
    Ok(m.nrows())
}

/// `‖M − M†‖_F`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn is_hermitian(m: &ComplexMatrix) -> bool {
    m.nrows() == m.ncols() && hermitian_deviation(m) <= HERMITIAN_TOL * scale(m)
}

pub fn ensure_hermitian(m: &ComplexMatrix) -> Result<()> {
    ensure_square(m)?;
    let deviation = hermitian_deviation(m);
    let tolerance = HERMITIAN_TOL * scale(m);
    if deviation > tolerance {
        return Err(LinalgError::NonHermitian { deviation, tolerance });
    }
    Ok(())
}

/// Hermitian part `(M + M†)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_col(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

pub fn unvec_col(v: &ComplexVector, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Coefficient matrix of a bipartite vector: `M[j,k] = v[j·d + k]`.
pub fn vector_to_coefficients(v: &ComplexVector, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |j, k| v[j * d + k])
}

/// Inverse of [`vector_to_coefficients`].
pub fn coefficients_to_vector(m: &ComplexMatrix) -> ComplexVector {
    let (r, cols) = m.shape();
    ComplexVector::from_fn(r * cols, |idx, _| m[(idx / cols, idx % cols)])
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, ordered like `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let lambda = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(self.eigenvalues[i], 0.0)
            } else {
                C64::default()
            }
        });
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_finite(m)?;
    ensure_hermitian(m)?;
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ties in solver order
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors: orthonormalize_columns(eigenvectors) })
}

/// Modified Gram-Schmidt pass; cleans up eigenvectors inside degenerate clusters.
fn orthonormalize_columns(mut v: ComplexMatrix) -> ComplexMatrix {
    let n = v.ncols();
    for j in 0..n {
        for k in 0..j {
            let proj = v.column(k).dotc(&v.column(j));
            let qk = v.column(k).into_owned();
            v.column_mut(j).axpy(-proj, &qk, C64::new(1.0, 0.0));
        }
        let norm = v.column(j).norm();
        if norm > 0.0 {
            v.column_mut(j).unscale_mut(norm);
        }
    }
    v
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.eigenvalues[0])
}

pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.eigenvalues)
}

/// Matrix exponential by scaling and squaring with a Padé kernel.
pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(m)?;
    check_finite(m)?;
    if m.iter().all(|z| *z == C64::default()) {
        return Ok(ComplexMatrix::identity(n, n));
    }
    Ok(m.exp())
}

/// Residual `‖Φ⁻¹WΦ − Wᵀ‖_F`, or `None` when Φ is singular.
pub fn similarity_residual(w: &ComplexMatrix, phi: &ComplexMatrix) -> Option<f64> {
    let inv = phi.clone().try_inverse()?;
    Some((inv * w * phi - w.transpose()).norm())
}

/// Finds an invertible Φ with `Φ⁻¹ W Φ = Wᵀ`.
///
/// Works on the solution space of `W X − X Wᵀ = 0` instead of Jordan forms:
/// the nullspace is spanned by the right singular vectors of
/// `I ⊗ W − W ⊗ I` and random combinations of a spanning set are generically
/// invertible. Sampling is seeded, so the result is deterministic.
pub fn similarity_to_transpose(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(SIMILARITY_SEED);
    similarity_to_transpose_with_rng(w, &mut rng)
}

pub fn similarity_to_transpose_with_rng<R: Rng + ?Sized>(
    w: &ComplexMatrix,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let d = ensure_square(w)?;
    check_finite(w)?;
    let w_scale = scale(w);
    let target = SIMILARITY_RESIDUAL * w_scale;
    if (w - w.transpose()).norm() <= 1e-14 * w_scale {
        return Ok(ComplexMatrix::identity(d, d));
    }

    let null_basis = transpose_intertwiners(w);
    let mut best_residual = f64::INFINITY;
    let mut attempts = 0;

    // First pass asks for a comfortable margin; the dense pass settles for the contract bound.
    for (draws, bound) in [(SIMILARITY_DRAWS, 1e-2 * target), (SIMILARITY_DENSE_DRAWS, target)] {
        for draw in 0..draws {
            attempts += 1;
            let phi = if bound < target || draw % 2 == 0 {
                random_combination(&null_basis, rng, null_basis.len())
            } else {
                // sparse draws reach solutions that full mixtures cancel
                random_combination(&null_basis, rng, 1 + draw % null_basis.len().max(1))
            };
            let norm = phi.norm();
            if norm == 0.0 {
                continue;
            }
            let phi = phi.unscale(norm);
            if phi.determinant().norm() <= SIMILARITY_DET_FLOOR {
                continue;
            }
            if let Some(residual) = similarity_residual(w, &phi) {
                if residual <= bound {
                    return Ok(phi);
                }
                best_residual = best_residual.min(residual);
            }
        }
    }
    Err(LinalgError::SolverFailure { attempts, best_residual })
}

/// Basis of `{X : W X = X Wᵀ}` as d×d matrices. Always at least d elements,
/// plus any further directions whose singular value sits at roundoff level.
fn transpose_intertwiners(w: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let d = w.nrows();
    let id = ComplexMatrix::identity(d, d);
    let system = kron(&id, w) - kron(w, &id);
    let cutoff = 1e-13 * scale(&system);
    let svd = SVD::new(system, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let n = d * d;
    // singular values descending
    let mut take = svd.singular_values.iter().filter(|&&s| s <= cutoff).count();
    take = take.max(d).min(n);
    (n - take..n)
        .map(|row| {
            let v = ComplexVector::from_iterator(n, v_t.row(row).iter().map(|z| z.conj()));
            unvec_col(&v, d, d)
        })
        .collect()
}

fn random_combination<R: Rng + ?Sized>(
    basis: &[ComplexMatrix],
    rng: &mut R,
    terms: usize,
) -> ComplexMatrix {
    let d = basis[0].nrows();
    let mut out = ComplexMatrix::zeros(d, d);
    if terms >= basis.len() {
        for x in basis {
            out += x * random_complex(rng);
        }
    } else {
        for _ in 0..terms {
            let k = rng.random_range(0..basis.len());
            out += &basis[k] * random_complex(rng);
        }
    }
    out
}

/// Standard complex normal draw.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    hermitian_part(&random_matrix(rng, n, n))
}

/// Normalized complex-normal vector; Haar-distributed on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexVector {
    let v = ComplexVector::from_fn(n, |_, _| random_complex(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// `|v⟩⟨v|`.
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}
