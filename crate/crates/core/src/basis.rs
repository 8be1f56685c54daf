//! Orthonormal traceless operator bases `{F_a}` for `M_d(C)`.
//!
//! The completing element `F_{d²} = 1_d/√d` is implied and never stored.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{c, trace, ComplexMatrix, C64};

/// Pass/fail threshold used by [`validate_elements`].
pub const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("operator basis needs d >= 2, got {0}")]
    InvalidDimension(usize),
    #[error("basis element {index} is {rows}x{cols}, expected {dim}x{dim}")]
    ShapeMismatch { index: usize, rows: usize, cols: usize, dim: usize },
    #[error("basis for d = {dim} needs {expected} elements, got {found}")]
    WrongCount { dim: usize, expected: usize, found: usize },
    #[error("basis is not orthonormal and traceless (trace deviation {max_trace_deviation:.3e}, Gram deviation {max_gram_deviation:.3e})")]
    Invalid { max_trace_deviation: f64, max_gram_deviation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisReport {
    /// `max_a |Tr F_a|`
    pub max_trace_deviation: f64,
    /// `max_ab |Tr(F_a† F_b) − δ_ab|`
    pub max_gram_deviation: f64,
    pub count_ok: bool,
    pub passed: bool,
}

impl OperatorBasis {
    /// Wraps a caller-supplied basis after checking every invariant.
    pub fn new(dim: usize, elements: Vec<ComplexMatrix>) -> Result<Self, BasisError> {
        if dim < 2 {
            return Err(BasisError::InvalidDimension(dim));
        }
        let report = validate_elements(dim, &elements)?;
        if !report.count_ok {
            return Err(BasisError::WrongCount {
                dim,
                expected: dim * dim - 1,
                found: elements.len(),
            });
        }
        if !report.passed {
            return Err(BasisError::Invalid {
                max_trace_deviation: report.max_trace_deviation,
                max_gram_deviation: report.max_gram_deviation,
            });
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of traceless elements, `d² − 1`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, a: usize) -> &ComplexMatrix {
        &self.elements[a]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.elements.iter().all(|f| (f - f.adjoint()).norm() <= tol)
    }

    pub fn validate(&self) -> BasisReport {
        validate_elements(self.dim, &self.elements).expect("shapes checked on construction")
    }

    /// Expansion coefficients `Tr(F_a† K)` of the traceless part of `k`.
    pub fn coefficients(&self, k: &ComplexMatrix) -> Vec<C64> {
        self.elements.iter().map(|f| hs_inner(f, k)).collect()
    }

    /// `Σ_a x_a F_a`.
    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (x, f) in coeffs.iter().zip(&self.elements) {
            out += f * *x;
        }
        out
    }

    /// `(Tr K / d)·1_d + Σ_a Tr(F_a† K)·F_a`.
    pub fn reconstruct(&self, k: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::identity(d, d) * (trace(k) / d as f64);
        out += self.combine(&self.coefficients(k));
        out
    }
}

/// Hilbert–Schmidt inner product `Tr(A† B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Generalized Gell-Mann basis at unit Hilbert–Schmidt norm, ordered
/// symmetric, antisymmetric, diagonal. For d = 2 this is `σ/√2`.
pub fn standard_basis(d: usize) -> Result<OperatorBasis, BasisError> {
    if d < 2 {
        return Err(BasisError::InvalidDimension(d));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = c(h, 0.0);
            m[(k, j)] = c(h, 0.0);
            elements.push(m);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = c(0.0, -h);
            m[(k, j)] = c(0.0, h);
            elements.push(m);
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = c(1.0 / norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) / norm, 0.0);
        elements.push(m);
    }
    Ok(OperatorBasis { dim: d, elements })
}

/// Reports how far a candidate element list is from an orthonormal traceless basis.
pub fn validate_elements(dim: usize, elements: &[ComplexMatrix]) -> Result<BasisReport, BasisError> {
    for (index, f) in elements.iter().enumerate() {
        if f.shape() != (dim, dim) {
            return Err(BasisError::ShapeMismatch { index, rows: f.nrows(), cols: f.ncols(), dim });
        }
    }
    let max_trace_deviation = elements.iter().map(|f| trace(f).norm()).fold(0.0, f64::max);
    let mut max_gram_deviation: f64 = 0.0;
    for (a, fa) in elements.iter().enumerate() {
        for (b, fb) in elements.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            max_gram_deviation = max_gram_deviation.max((hs_inner(fa, fb) - c(target, 0.0)).norm());
        }
    }
    let count_ok = dim >= 1 && elements.len() == dim * dim - 1;
    let passed = count_ok && max_trace_deviation <= BASIS_TOL && max_gram_deviation <= BASIS_TOL;
    Ok(BasisReport { max_trace_deviation, max_gram_deviation, count_ok, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qubit_basis_is_normalized_pauli() {
        let b = standard_basis(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sx = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.)]);
        let sy = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -h), c(0., h), c(0., 0.)]);
        let sz = ComplexMatrix::from_row_slice(2, 2, &[c(h, 0.), c(0., 0.), c(0., 0.), c(-h, 0.)]);
        for (got, want) in b.elements().iter().zip([sx, sy, sz]) {
            assert!((got - want).norm() < 1e-15);
        }
        let report = b.validate();
        assert!(report.passed);
        assert!(report.max_gram_deviation <= 1e-15 && report.max_trace_deviation <= 1e-15);
    }

    #[test]
    fn gram_matrix_is_identity() {
        for d in 2..=6 {
            let b = standard_basis(d).unwrap();
            assert_eq!(b.len(), d * d - 1);
            let report = b.validate();
            assert!(report.max_gram_deviation <= 1e-12, "d={d}: {report:?}");
            assert!(report.max_trace_deviation <= 1e-12);
            assert!(b.is_hermitian(0.0));
        }
    }

    #[test]
    fn rejects_small_dimension() {
        assert_eq!(standard_basis(1), Err(BasisError::InvalidDimension(1)));
    }

    #[test]
    fn doubled_element_fails() {
        let mut els = standard_basis(2).unwrap().elements().to_vec();
        els[0] *= c(2.0, 0.0);
        let report = validate_elements(2, &els).unwrap();
        assert!(!report.passed);
        assert!((report.max_gram_deviation - 3.0).abs() < 1e-12);
        assert!(OperatorBasis::new(2, els).is_err());
    }

    #[test]
    fn identity_element_fails() {
        for d in [2usize, 3] {
            let mut els = standard_basis(d).unwrap().elements().to_vec();
            let last = els.len() - 1;
            els[last] = ComplexMatrix::identity(d, d) * c(1.0 / (d as f64).sqrt(), 0.0);
            let report = validate_elements(d, &els).unwrap();
            assert!(!report.passed);
            assert!((report.max_trace_deviation - (d as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_reported() {
        let els = vec![ComplexMatrix::zeros(3, 3)];
        assert!(matches!(validate_elements(2, &els), Err(BasisError::ShapeMismatch { index: 0, .. })));
    }

    #[test]
    fn expansion_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 2..=4 {
            let b = standard_basis(d).unwrap();
            let k = random_matrix(&mut rng, d, d);
            assert!((b.reconstruct(&k) - &k).norm() <= 1e-12 * k.norm().max(1.0));
        }
    }
}
