//! Semigroup generators in GKS form and Lindblad form, and their matrix
//! representation as superoperators.
//!
//! GKS form:
//!
//! ```text
//! L[ρ] = −i[H, ρ] + Σ_ab c_ab (F_a ρ F_b† − ½{F_b† F_a, ρ})
//! ```

use thiserror::Error;

use crate::basis::{BasisError, OperatorBasis};
use crate::linalg::{
    self, c, ensure_hermitian, hermitian_eig, kron, scale, trace, unvec_col, vec_col, ComplexMatrix,
    LinalgError, C64, HERMITIAN_TOL, POSITIVITY_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("{what} must be {expected}x{expected}, got {rows}x{cols}")]
    ShapeMismatch { what: &'static str, expected: usize, rows: usize, cols: usize },
    #[error("hamiltonian is not Hermitian (deviation {0:.3e})")]
    NonHermitianHamiltonian(f64),
    #[error("hamiltonian must be traceless (|Tr H| = {0:.3e})")]
    TracefulHamiltonian(f64),
    #[error("coefficient matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitianCoefficients(f64),
    #[error("jump operator {index} is not traceless (|Tr V| = {trace:.3e})")]
    NonTracelessJump { index: usize, trace: f64 },
    #[error("coefficient matrix has eigenvalue {min_eigenvalue:.6e} below -{tolerance:.1e}; no Lindblad form exists")]
    NotCompletelyPositive { min_eigenvalue: f64, tolerance: f64 },
    #[error("basis dimension {basis} does not match generator dimension {dim}")]
    BasisDimension { basis: usize, dim: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, GeneratorError>;

/// Linear map on d×d matrices as a d²×d² matrix acting on column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.shape() != (n, n) {
            return Err(GeneratorError::ShapeMismatch {
                what: "superoperator",
                expected: n,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        linalg::check_finite(&matrix)?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        Self { dim, matrix: ComplexMatrix::identity(n, n) }
    }

    pub fn zero(dim: usize) -> Self {
        let n = dim * dim;
        Self { dim, matrix: ComplexMatrix::zeros(n, n) }
    }

    /// Builds the representation column by column from the map's action on matrix units.
    pub fn from_map(dim: usize, map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = dim * dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for j in 0..dim {
            for i in 0..dim {
                let mut unit = ComplexMatrix::zeros(dim, dim);
                unit[(i, j)] = c(1.0, 0.0);
                matrix.set_column(i + j * dim, &vec_col(&map(&unit)));
            }
        }
        Self { dim, matrix }
    }

    /// Transposition in the standard basis.
    pub fn transpose_map(dim: usize) -> Self {
        Self::from_map(dim, |x| x.transpose())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(GeneratorError::ShapeMismatch {
                what: "input matrix",
                expected: self.dim,
                rows: rho.nrows(),
                cols: rho.ncols(),
            });
        }
        Ok(unvec_col(&(&self.matrix * vec_col(rho)), self.dim, self.dim))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim, "composing superoperators of different dimension");
        Superoperator { dim: self.dim, matrix: &self.matrix * &other.matrix }
    }

    /// `a ⊗ b` acting on matrices over `C^d ⊗ C^d`, with `|j⟩⊗|k⟩ ↦ j·d + k`.
    pub fn tensor(a: &Superoperator, b: &Superoperator) -> Superoperator {
        let (da, db) = (a.dim, b.dim);
        let d = da * db;
        let n = d * d;
        let mut matrix = ComplexMatrix::zeros(n, n);
        // X = E_ik ⊗ E_jl maps to a[E_ik] ⊗ b[E_jl]
        for k in 0..da {
            for i in 0..da {
                let left = unvec_col(&a.matrix.column(i + k * da).into_owned(), da, da);
                for l in 0..db {
                    for j in 0..db {
                        let right = unvec_col(&b.matrix.column(j + l * db).into_owned(), db, db);
                        let image = kron(&left, &right);
                        let row = i * db + j;
                        let col = k * db + l;
                        matrix.set_column(row + col * d, &vec_col(&image));
                    }
                }
            }
        }
        Superoperator { dim: d, matrix }
    }

    pub fn scaled(&self, factor: f64) -> Superoperator {
        Superoperator { dim: self.dim, matrix: self.matrix.scale(factor) }
    }
}

impl std::ops::Add for &Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "adding superoperators of different dimension");
        Superoperator { dim: self.dim, matrix: &self.matrix + &rhs.matrix }
    }
}

fn check_shape(what: &'static str, m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(GeneratorError::ShapeMismatch { what, expected: n, rows: m.nrows(), cols: m.ncols() });
    }
    linalg::check_finite(m)?;
    Ok(())
}

fn check_hamiltonian(h: &ComplexMatrix, d: usize) -> Result<()> {
    check_shape("hamiltonian", h, d)?;
    let dev = linalg::hermitian_deviation(h);
    if dev > HERMITIAN_TOL * scale(h) {
        return Err(GeneratorError::NonHermitianHamiltonian(dev));
    }
    let tr = trace(h).norm();
    if tr > HERMITIAN_TOL * scale(h) {
        return Err(GeneratorError::TracefulHamiltonian(tr));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GKSGenerator {
    dim: usize,
    hamiltonian: ComplexMatrix,
    coeff: ComplexMatrix,
    basis: OperatorBasis,
}

impl GKSGenerator {
    pub fn new(hamiltonian: ComplexMatrix, coeff: ComplexMatrix, basis: OperatorBasis) -> Result<Self> {
        let dim = basis.dim();
        check_hamiltonian(&hamiltonian, dim)?;
        check_shape("coefficient matrix", &coeff, dim * dim - 1)?;
        let dev = linalg::hermitian_deviation(&coeff);
        if dev > HERMITIAN_TOL * scale(&coeff) {
            return Err(GeneratorError::NonHermitianCoefficients(dev));
        }
        Ok(Self { dim, hamiltonian, coeff, basis })
    }

    /// `H = 0, C = 0`.
    pub fn null(basis: OperatorBasis) -> Self {
        let d = basis.dim();
        let n = d * d - 1;
        Self { dim: d, hamiltonian: ComplexMatrix::zeros(d, d), coeff: ComplexMatrix::zeros(n, n), basis }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn coeff(&self) -> &ComplexMatrix {
        &self.coeff
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn with_hamiltonian(&self, hamiltonian: ComplexMatrix) -> Result<Self> {
        Self::new(hamiltonian, self.coeff.clone(), self.basis.clone())
    }

    /// `K = Σ_ab c_ab F_b† F_a`, the operator inside the anticommutator.
    fn dissipative_anchor(&self) -> ComplexMatrix {
        let f = self.basis.elements();
        let mut k = ComplexMatrix::zeros(self.dim, self.dim);
        for (a, fa) in f.iter().enumerate() {
            for (b, fb) in f.iter().enumerate() {
                let cab = self.coeff[(a, b)];
                if cab != C64::default() {
                    k += fb.adjoint() * fa * cab;
                }
            }
        }
        k
    }

    /// Evaluates `L[ρ]` term by term.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_shape("density matrix", rho, self.dim)?;
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * c(0.0, -1.0);
        let f = self.basis.elements();
        for (a, fa) in f.iter().enumerate() {
            // Σ_b c_ab F_b† folded into one right factor
            let mut right = ComplexMatrix::zeros(self.dim, self.dim);
            for (b, fb) in f.iter().enumerate() {
                let cab = self.coeff[(a, b)];
                if cab != C64::default() {
                    right += fb.adjoint() * cab;
                }
            }
            out += fa * rho * right;
        }
        let k = self.dissipative_anchor();
        out -= (&k * rho + rho * &k).scale(0.5);
        Ok(out)
    }

    /// Matrix form of `L`, built from the Kronecker identities rather than from `apply`.
    pub fn superoperator(&self) -> Superoperator {
        let d = self.dim;
        let id = ComplexMatrix::identity(d, d);
        let h = &self.hamiltonian;
        let mut m = (kron(&id, h) - kron(&h.transpose(), &id)) * c(0.0, -1.0);
        let f = self.basis.elements();
        for (a, fa) in f.iter().enumerate() {
            for (b, fb) in f.iter().enumerate() {
                let cab = self.coeff[(a, b)];
                if cab != C64::default() {
                    m += kron(&fb.conjugate(), fa) * cab;
                }
            }
        }
        let k = self.dissipative_anchor();
        m -= (kron(&id, &k) + kron(&k.transpose(), &id)).scale(0.5);
        Superoperator { dim: d, matrix: m }
    }

    /// Spectrum of `C`, ascending.
    pub fn coeff_eigenvalues(&self) -> Vec<f64> {
        hermitian_eig(&self.coeff).expect("coefficient matrix validated Hermitian").eigenvalues
    }
}

pub fn apply_generator(g: &GKSGenerator, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    g.apply(rho)
}

pub fn superoperator_of(g: &GKSGenerator) -> Superoperator {
    g.superoperator()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: ComplexMatrix,
    jump_ops: Vec<ComplexMatrix>,
}

impl LindbladGenerator {
    pub fn new(dim: usize, hamiltonian: ComplexMatrix, jump_ops: Vec<ComplexMatrix>) -> Result<Self> {
        check_hamiltonian(&hamiltonian, dim)?;
        for (index, v) in jump_ops.iter().enumerate() {
            check_shape("jump operator", v, dim)?;
            let tr = trace(v).norm();
            if tr > HERMITIAN_TOL * scale(v) {
                return Err(GeneratorError::NonTracelessJump { index, trace: tr });
            }
        }
        Ok(Self { dim, hamiltonian, jump_ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jump_ops(&self) -> &[ComplexMatrix] {
        &self.jump_ops
    }

    /// `−i[H,ρ] + Σ_r (V_r ρ V_r† − ½{V_r† V_r, ρ})`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_shape("density matrix", rho, self.dim)?;
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * c(0.0, -1.0);
        for v in &self.jump_ops {
            let vd = v.adjoint();
            let vdv = &vd * v;
            out += v * rho * &vd - (&vdv * rho + rho * &vdv).scale(0.5);
        }
        Ok(out)
    }
}

/// Expands each `V_r = Σ_a v_ra F_a` and forms `c_ab = Σ_r v_ra v*_rb`.
pub fn lindblad_to_gks(l: &LindbladGenerator, basis: &OperatorBasis) -> Result<GKSGenerator> {
    if basis.dim() != l.dim {
        return Err(GeneratorError::BasisDimension { basis: basis.dim(), dim: l.dim });
    }
    let n = basis.len();
    let mut coeff = ComplexMatrix::zeros(n, n);
    for v in &l.jump_ops {
        let x = basis.coefficients(v);
        for a in 0..n {
            for b in 0..n {
                coeff[(a, b)] += x[a] * x[b].conj();
            }
        }
    }
    GKSGenerator::new(l.hamiltonian.clone(), linalg::hermitian_part(&coeff), basis.clone())
}

pub fn gks_to_lindblad(g: &GKSGenerator) -> Result<LindbladGenerator> {
    gks_to_lindblad_with_tol(g, POSITIVITY_TOL)
}

/// Factorizes `C = A†A` through its eigendecomposition and returns
/// `V_r = Σ_a A*_ra F_a`, strongest channel first. Eigenvalues in
/// `[−ε, 0]` are clamped to zero; anything lower is an error.
pub fn gks_to_lindblad_with_tol(g: &GKSGenerator, relative_tol: f64) -> Result<LindbladGenerator> {
    ensure_hermitian(&g.coeff)?;
    let eig = hermitian_eig(&g.coeff)?;
    let tolerance = relative_tol * scale(&g.coeff);
    let min_eigenvalue = eig.eigenvalues[0];
    if min_eigenvalue < -tolerance {
        return Err(GeneratorError::NotCompletelyPositive { min_eigenvalue, tolerance });
    }
    let drop_below = 1e-14 * scale(&g.coeff);
    let mut jump_ops = Vec::new();
    for r in (0..eig.eigenvalues.len()).rev() {
        let lambda = eig.eigenvalues[r];
        if lambda <= drop_below {
            continue;
        }
        let column: Vec<C64> = eig.eigenvectors.column(r).iter().map(|z| z * lambda.sqrt()).collect();
        jump_ops.push(g.basis.combine(&column));
    }
    LindbladGenerator::new(g.dim, g.hamiltonian.clone(), jump_ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::standard_basis;
    use crate::linalg::{random_hermitian, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> ComplexMatrix {
        let n = values.len();
        ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { C64::default() })
    }

    fn traceless_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
        let h = random_hermitian(rng, d);
        let t = trace(&h) / d as f64;
        h - ComplexMatrix::identity(d, d) * t
    }

    fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.)])
    }

    #[test]
    fn null_generator_is_zero() {
        let g = GKSGenerator::null(standard_basis(3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_matrix(&mut rng, 3, 3);
        assert_eq!(g.apply(&rho).unwrap(), ComplexMatrix::zeros(3, 3));
        assert_eq!(g.superoperator(), Superoperator::zero(3));
    }

    #[test]
    fn depolarizing_qubit_on_up_state() {
        // term-by-term: Σ_a F_a ρ F_a − ρ with F = σ/√2 gives ½(σ_x ρ σ_x + σ_y ρ σ_y + σ_z ρ σ_z) − 3/2 ρ
        let basis = standard_basis(2).unwrap();
        let g = GKSGenerator::new(ComplexMatrix::zeros(2, 2), diag(&[1., 1., 1.]), basis).unwrap();
        let rho = diag(&[1.0, 0.0]);
        let out = g.apply(&rho).unwrap();
        assert!((out - diag(&[-1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn hamiltonian_fixes_maximally_mixed_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = 3;
        let h = traceless_hermitian(&mut rng, d);
        let g = GKSGenerator::new(h, ComplexMatrix::zeros(8, 8), standard_basis(d).unwrap()).unwrap();
        let rho = ComplexMatrix::identity(d, d) * c(1.0 / d as f64, 0.0);
        assert!(g.apply(&rho).unwrap().norm() < 1e-15);
    }

    #[test]
    fn construction_rejects_invalid_parts() {
        let basis = standard_basis(2).unwrap();
        let z3 = ComplexMatrix::zeros(3, 3);
        let h = diag(&[1.0, 0.0]);
        assert!(matches!(
            GKSGenerator::new(h, z3.clone(), basis.clone()),
            Err(GeneratorError::TracefulHamiltonian(_))
        ));
        let h = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            GKSGenerator::new(h, z3.clone(), basis.clone()),
            Err(GeneratorError::NonHermitianHamiltonian(_))
        ));
        let mut cm = z3.clone();
        cm[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            GKSGenerator::new(ComplexMatrix::zeros(2, 2), cm, basis.clone()),
            Err(GeneratorError::NonHermitianCoefficients(_))
        ));
        assert!(matches!(
            GKSGenerator::new(ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 2), basis),
            Err(GeneratorError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn sigma_minus_coefficients() {
        let basis = standard_basis(2).unwrap();
        let l = LindbladGenerator::new(2, ComplexMatrix::zeros(2, 2), vec![sigma_minus()]).unwrap();
        let g = lindblad_to_gks(&l, &basis).unwrap();
        let expected = ComplexMatrix::from_row_slice(
            3,
            3,
            &[c(0.5, 0.), c(0., 0.5), c(0., 0.), c(0., -0.5), c(0.5, 0.), c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
        );
        assert!((g.coeff() - expected).norm() < 1e-15);
        let eigs = g.coeff_eigenvalues();
        assert!(eigs[0].abs() < 1e-15 && eigs[1].abs() < 1e-15 && (eigs[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_and_basis_jump_lists() {
        let basis = standard_basis(3).unwrap();
        let l = LindbladGenerator::new(3, ComplexMatrix::zeros(3, 3), vec![]).unwrap();
        assert_eq!(lindblad_to_gks(&l, &basis).unwrap().coeff(), &ComplexMatrix::zeros(8, 8));

        let l = LindbladGenerator::new(3, ComplexMatrix::zeros(3, 3), vec![basis.element(0).clone()]).unwrap();
        let mut expected = ComplexMatrix::zeros(8, 8);
        expected[(0, 0)] = c(1.0, 0.0);
        assert!((lindblad_to_gks(&l, &basis).unwrap().coeff() - expected).norm() < 1e-15);
    }

    #[test]
    fn traceful_jump_rejected() {
        let r = LindbladGenerator::new(2, ComplexMatrix::zeros(2, 2), vec![diag(&[1.0, 0.0])]);
        assert!(matches!(r, Err(GeneratorError::NonTracelessJump { index: 0, .. })));
    }

    #[test]
    fn gks_to_lindblad_examples() {
        let basis = standard_basis(2).unwrap();
        let g = GKSGenerator::null(basis.clone());
        assert!(gks_to_lindblad(&g).unwrap().jump_ops().is_empty());

        let g = GKSGenerator::new(ComplexMatrix::zeros(2, 2), diag(&[1., 0., 0.]), basis.clone()).unwrap();
        let l = gks_to_lindblad(&g).unwrap();
        assert_eq!(l.jump_ops().len(), 1);
        // equal to F_1 up to a phase
        let v = &l.jump_ops()[0];
        let overlap = crate::basis::hs_inner(basis.element(0), v);
        assert!((overlap.norm() - 1.0).abs() < 1e-14);
        assert!((v - basis.element(0) * overlap).norm() < 1e-14);

        let g = GKSGenerator::new(ComplexMatrix::zeros(2, 2), diag(&[1., 1., -1.]), basis).unwrap();
        assert!(matches!(gks_to_lindblad(&g), Err(GeneratorError::NotCompletelyPositive { .. })));
    }

    #[test]
    fn gks_lindblad_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=4 {
            let basis = standard_basis(d).unwrap();
            let n = d * d - 1;
            let b = random_matrix(&mut rng, n, n);
            let coeff = linalg::hermitian_part(&(b.adjoint() * &b));
            let g = GKSGenerator::new(traceless_hermitian(&mut rng, d), coeff, basis.clone()).unwrap();
            let l = gks_to_lindblad(&g).unwrap();
            let back = lindblad_to_gks(&l, &basis).unwrap();
            assert!((back.coeff() - g.coeff()).norm() <= 1e-9 * scale(g.coeff()));
            for _ in 0..5 {
                let rho = random_matrix(&mut rng, d, d);
                let diff = g.apply(&rho).unwrap() - l.apply(&rho).unwrap();
                assert!(diff.norm() <= 1e-10 * scale(g.coeff()) * rho.norm().max(1.0));
            }
        }
    }

    #[test]
    fn superoperator_matches_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 2..=4 {
            let n = d * d - 1;
            let g = GKSGenerator::new(
                traceless_hermitian(&mut rng, d),
                random_hermitian(&mut rng, n),
                standard_basis(d).unwrap(),
            )
            .unwrap();
            let s = g.superoperator();
            let from_map = Superoperator::from_map(d, |x| g.apply(x).unwrap());
            assert!((s.matrix() - from_map.matrix()).norm() < 1e-12);
            for _ in 0..20 {
                let rho = random_matrix(&mut rng, d, d);
                assert!((s.apply(&rho).unwrap() - g.apply(&rho).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_hamiltonian_spectrum_is_imaginary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = 3;
        let h = traceless_hermitian(&mut rng, d);
        let g = GKSGenerator::new(h.clone(), ComplexMatrix::zeros(8, 8), standard_basis(d).unwrap()).unwrap();
        // −i(1⊗H − Hᵀ⊗1) is anti-Hermitian; i·S is Hermitian with spectrum {E_i − E_j}
        let s = g.superoperator().into_matrix();
        assert!((&s + s.adjoint()).norm() < 1e-13);
        let energies = linalg::eigenvalues(&h).unwrap();
        let mut gaps: Vec<f64> = energies.iter().flat_map(|a| energies.iter().map(move |b| a - b)).collect();
        gaps.sort_by(f64::total_cmp);
        let spectrum = linalg::eigenvalues(&(s * c(0.0, 1.0))).unwrap();
        for (x, y) in spectrum.iter().zip(&gaps) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in 2..=4 {
            let n = d * d - 1;
            let g = GKSGenerator::new(
                traceless_hermitian(&mut rng, d),
                random_hermitian(&mut rng, n),
                standard_basis(d).unwrap(),
            )
            .unwrap();
            let rho = random_hermitian(&mut rng, d);
            let out = g.apply(&rho).unwrap();
            assert!(trace(&out).norm() < 1e-10);
            assert!(linalg::hermitian_deviation(&out) < 1e-10);
        }
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let t = Superoperator::tensor(&Superoperator::identity(2), &Superoperator::identity(3));
        assert_eq!(t, Superoperator::identity(6));
    }

    #[test]
    fn tensor_acts_factorwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let basis = standard_basis(2).unwrap();
        let g = GKSGenerator::new(traceless_hermitian(&mut rng, 2), random_hermitian(&mut rng, 3), basis).unwrap();
        let s = g.superoperator();
        let t = Superoperator::tensor(&s, &Superoperator::transpose_map(2));
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 2, 2);
        let lhs = t.apply(&kron(&a, &b)).unwrap();
        let rhs = kron(&g.apply(&a).unwrap(), &b.transpose());
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
