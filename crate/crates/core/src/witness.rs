//! Entangled witness states for `γ_t ⊗ γ_t`.
//!
//! For orthogonal `|φ⟩, |ψ⟩ ∈ C^d ⊗ C^d` the rate
//!
//! ```text
//! L_{φ,ψ} = ⟨φ| (L⊗I + I⊗L)[|ψ⟩⟨ψ|] |φ⟩
//! ```
//!
//! is the slope at `t = 0` of `G(t) = ⟨φ|(γ_t⊗γ_t)[|ψ⟩⟨ψ|]|φ⟩`, and
//! `G(0) = 0`. A negative rate therefore certifies that `γ_t ⊗ γ_t` maps
//! `|ψ⟩⟨ψ|` outside the positive cone for small `t`.
//!
//! Bipartite vectors and their d×d coefficient matrices are related by
//! `v = Σ_jk M[j,k] |j⟩⊗|k⟩`, i.e. row-major flattening.
//!
//! Given a direction `w ∈ C^{d²−1}` the witness uses `W = ½ Σ_a w_a F_a`,
//! an invertible `Φ` with `Φ⁻¹WΦ = Wᵀ` and `Ψ† = Φ⁻¹W`. Then
//! `ΦΨ† = W`, `Ψ†Φ = Wᵀ` and the rate evaluates to `½ w†Cw`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::basis::OperatorBasis;
use crate::dynamics::{tensor_extension, DynamicsError};
use crate::generator::{GKSGenerator, GeneratorError, Superoperator};
use crate::linalg::{
    self, c, coefficients_to_vector, hermitian_eig, hermitian_part, matrix_exp, min_eigenvalue, outer,
    scale, similarity_to_transpose, trace, unvec_col, vec_col, ComplexMatrix, ComplexVector, LinalgError,
    C64, POSITIVITY_TOL,
};

const ORTHOGONALITY_TOL: f64 = 1e-10;
const REALNESS_TOL: f64 = 1e-10;

/// Default scan grid: 30 log-spaced points on `[1e-4, 1]`.
pub const DEFAULT_GRID: (f64, f64, usize) = (1e-4, 1.0, 30);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("vectors are not orthogonal (|⟨φ|ψ⟩| = {0:.3e})")]
    NotOrthogonal(f64),
    #[error("ψ is the zero vector")]
    ZeroVector,
    #[error("vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("Tr(ΨΦ†) = {0:.3e} violates the orthogonality condition")]
    TraceConditionViolated(f64),
    #[error("direction produced W = 0")]
    DegenerateW,
    #[error("symmetric construction not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("Φ is singular")]
    SingularPhi,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type Result<T> = std::result::Result<T, WitnessError>;

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCandidate {
    /// `w`, with `W = ½ Σ_a w_a F_a`.
    pub direction: ComplexVector,
    pub w_matrix: ComplexMatrix,
    pub phi_matrix: ComplexMatrix,
    pub psi_matrix: ComplexMatrix,
    /// Unnormalized, row-major flattening of `phi_matrix`.
    pub phi: ComplexVector,
    /// Unnormalized, row-major flattening of `psi_matrix`.
    pub psi: ComplexVector,
    /// `L_{φ,ψ}` evaluated directly through the tensor-extended generator.
    pub value: f64,
    /// `w†Cw`.
    pub quadratic_form: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessOutcome {
    Found(Box<WitnessCandidate>),
    NoNegativeDirection { min_c_eigenvalue: f64 },
}

impl WitnessOutcome {
    pub fn candidate(&self) -> Option<&WitnessCandidate> {
        match self {
            WitnessOutcome::Found(w) => Some(w),
            WitnessOutcome::NoNegativeDirection { .. } => None,
        }
    }
}

impl WitnessCandidate {
    /// Assembles a candidate from `W` and any invertible `Φ`; `Ψ† = Φ⁻¹W`.
    pub fn from_parts(g: &GKSGenerator, w_matrix: ComplexMatrix, phi_matrix: ComplexMatrix) -> Result<Self> {
        let basis = g.basis();
        let direction = ComplexVector::from_iterator(
            basis.len(),
            basis.coefficients(&w_matrix).into_iter().map(|x| x * 2.0),
        );
        let psi_dagger = phi_matrix.clone().lu().solve(&w_matrix).ok_or(WitnessError::SingularPhi)?;
        let psi_matrix = psi_dagger.adjoint();
        let phi = coefficients_to_vector(&phi_matrix);
        let psi = coefficients_to_vector(&psi_matrix);
        let value = l_functional(g, &phi, &psi)?;
        let quadratic_form = (direction.adjoint() * g.coeff() * &direction)[(0, 0)].re;
        Ok(Self { direction, w_matrix, phi_matrix, psi_matrix, phi, psi, value, quadratic_form })
    }

    /// `+1` if `Ψ†Φ = Wᵀ`, `−1` if `Ψ†Φ = −Wᵀ`, within `tol`.
    pub fn transpose_sign(&self, tol: f64) -> Option<f64> {
        let product = self.psi_matrix.adjoint() * &self.phi_matrix;
        let wt = self.w_matrix.transpose();
        if (&product - &wt).norm() <= tol {
            Some(1.0)
        } else if (&product + &wt).norm() <= tol {
            Some(-1.0)
        } else {
            None
        }
    }

    /// `|ψ⟩` normalized, ready to form the initial density matrix.
    pub fn normalized_psi(&self) -> ComplexVector {
        self.psi.unscale(self.psi.norm())
    }
}

fn check_pair(d2: usize, phi: &ComplexVector, psi: &ComplexVector) -> Result<()> {
    for v in [phi, psi] {
        if v.len() != d2 {
            return Err(WitnessError::LengthMismatch { expected: d2, found: v.len() });
        }
    }
    if psi.norm() == 0.0 {
        return Err(WitnessError::ZeroVector);
    }
    let overlap = phi.dotc(psi).norm();
    if overlap > ORTHOGONALITY_TOL * (phi.norm() * psi.norm()).max(1.0) {
        return Err(WitnessError::NotOrthogonal(overlap));
    }
    Ok(())
}

/// `⟨φ| ext[|ψ⟩⟨ψ|] |φ⟩` for a precomputed tensor-extended generator.
pub fn l_functional_with(ext: &Superoperator, phi: &ComplexVector, psi: &ComplexVector) -> Result<f64> {
    check_pair(ext.dim(), phi, psi)?;
    let image = ext.apply(&outer(psi))?;
    Ok((phi.adjoint() * image * phi)[(0, 0)].re)
}

pub fn l_functional(g: &GKSGenerator, phi: &ComplexVector, psi: &ComplexVector) -> Result<f64> {
    l_functional_with(&tensor_extension(g), phi, psi)
}

/// The same rate written through the coefficient matrices Φ, Ψ of `|φ⟩, |ψ⟩`:
///
/// ```text
/// Σ_ab c_ab [Tr(ΨΦ†F_a) Tr(ΦΨ†F_b†) + Tr((Φ†Ψ)ᵀF_a) Tr((Ψ†Φ)ᵀF_b†)]
/// ```
///
/// The Hamiltonian and anticommutator terms do not contribute.
pub fn l_functional_trace_form(
    coeff: &ComplexMatrix,
    basis: &OperatorBasis,
    phi_matrix: &ComplexMatrix,
    psi_matrix: &ComplexMatrix,
) -> Result<f64> {
    let d = basis.dim();
    for m in [phi_matrix, psi_matrix] {
        if m.shape() != (d, d) {
            return Err(WitnessError::LengthMismatch { expected: d * d, found: m.len() });
        }
    }
    let n = basis.len();
    if coeff.shape() != (n, n) {
        return Err(WitnessError::LengthMismatch { expected: n * n, found: coeff.len() });
    }
    let psi_phi_dag = psi_matrix * phi_matrix.adjoint();
    let overlap = trace(&psi_phi_dag).norm();
    if overlap > ORTHOGONALITY_TOL * (phi_matrix.norm() * psi_matrix.norm()).max(1.0) {
        return Err(WitnessError::TraceConditionViolated(overlap));
    }
    let phi_psi_dag = psi_phi_dag.adjoint();
    let left_t = (phi_matrix.adjoint() * psi_matrix).transpose();
    let right_t = (psi_matrix.adjoint() * phi_matrix).transpose();

    let tr = |a: &ComplexMatrix, b: &ComplexMatrix| -> C64 { (a * b).trace() };
    let x: Vec<C64> = basis.elements().iter().map(|f| tr(&psi_phi_dag, f)).collect();
    let y: Vec<C64> = basis.elements().iter().map(|f| tr(&phi_psi_dag, &f.adjoint())).collect();
    let u: Vec<C64> = basis.elements().iter().map(|f| tr(&left_t, f)).collect();
    let v: Vec<C64> = basis.elements().iter().map(|f| tr(&right_t, &f.adjoint())).collect();

    let mut total = C64::default();
    for a in 0..n {
        for b in 0..n {
            total += coeff[(a, b)] * (x[a] * y[b] + u[a] * v[b]);
        }
    }
    Ok(total.re)
}

pub fn construct_witness(g: &GKSGenerator) -> Result<WitnessOutcome> {
    construct_witness_with_tol(g, POSITIVITY_TOL)
}

/// Builds a witness from the eigenvector of the most negative eigenvalue of `C`.
pub fn construct_witness_with_tol(g: &GKSGenerator, relative_tol: f64) -> Result<WitnessOutcome> {
    let eig = hermitian_eig(g.coeff())?;
    let min_c_eigenvalue = eig.eigenvalues[0];
    if min_c_eigenvalue >= -relative_tol * scale(g.coeff()) {
        return Ok(WitnessOutcome::NoNegativeDirection { min_c_eigenvalue });
    }
    let w: Vec<C64> = eig.eigenvectors.column(0).iter().map(|z| z * 0.5).collect();
    let w_matrix = g.basis().combine(&w);
    if w_matrix.norm() == 0.0 {
        return Err(WitnessError::DegenerateW);
    }
    let phi_matrix = similarity_to_transpose(&w_matrix)?;
    Ok(WitnessOutcome::Found(Box::new(WitnessCandidate::from_parts(g, w_matrix, phi_matrix)?)))
}

/// `(1/√2)[[0, 1], [−1, 0]]`, the singlet coefficient matrix. For every
/// traceless 2×2 `W` it gives `Ψ†Φ = −Wᵀ`.
pub fn singlet_phi() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)])
}

/// Witness with `Φ ∝ 1_d` taken in an eigenbasis of `W`.
///
/// Requires a Hermitian operator basis and a real symmetric `C`, so that
/// a real direction gives a Hermitian `W = UDU†`. In the rotated basis
/// `Φ' = 1_d/d` and `Ψ'† = dD`; mapped back, `Φ = UUᵀ/d`, `Ψ = dUDUᵀ`.
pub fn symmetric_case_witness(g: &GKSGenerator) -> Result<WitnessOutcome> {
    symmetric_case_witness_with_tol(g, POSITIVITY_TOL)
}

pub fn symmetric_case_witness_with_tol(g: &GKSGenerator, relative_tol: f64) -> Result<WitnessOutcome> {
    if !g.basis().is_hermitian(REALNESS_TOL) {
        return Err(WitnessError::NotApplicable("operator basis is not Hermitian".into()));
    }
    let coeff = g.coeff();
    let imag = coeff.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > REALNESS_TOL * scale(coeff) {
        return Err(WitnessError::NotApplicable(format!("C has complex entries (max |Im| = {imag:.3e})")));
    }
    let real_coeff = coeff.map(|z| c(z.re, 0.0));
    let eig = hermitian_eig(&real_coeff)?;
    let min_c_eigenvalue = eig.eigenvalues[0];
    if min_c_eigenvalue >= -relative_tol * scale(coeff) {
        return Ok(WitnessOutcome::NoNegativeDirection { min_c_eigenvalue });
    }
    let w = real_direction(&eig.eigenvectors.column(0).into_owned());
    let half: Vec<C64> = w.iter().map(|z| z * 0.5).collect();
    let w_matrix = hermitian_part(&g.basis().combine(&half));
    let d = g.dim();
    let weig = hermitian_eig(&w_matrix)?;
    let u = &weig.eigenvectors;
    let phi_matrix = u * u.transpose() / c(d as f64, 0.0);
    WitnessCandidate::from_parts(g, w_matrix, phi_matrix).map(|w| WitnessOutcome::Found(Box::new(w)))
}

/// Real unit vector in the span of `v` and `v̄`, after removing the global phase.
fn real_direction(v: &ComplexVector) -> ComplexVector {
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty");
    let phase = pivot.conj() / pivot.norm();
    let real = v.map(|z| c((z * phase).re, 0.0));
    real.unscale(real.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityScan {
    pub times: Vec<f64>,
    pub min_eigenvalues: Vec<f64>,
    /// `G(t) = ⟨φ|ρ(t)|φ⟩` with `ρ(0) = |ψ̂⟩⟨ψ̂|`.
    pub overlap_values: Vec<f64>,
    pub first_negative_time: Option<f64>,
}

/// `points` log-spaced times on `[start, stop]`.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    let (a, b) = (start.ln(), stop.ln());
    (0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()).collect()
}

pub fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points).map(|k| start + (stop - start) * k as f64 / (points - 1) as f64).collect()
}

pub fn default_grid() -> Vec<f64> {
    let (start, stop, points) = DEFAULT_GRID;
    log_grid(start, stop, points)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(WitnessError::InvalidGrid("empty grid".into()));
    }
    if let Some(t) = t_grid.iter().find(|t| **t < 0.0 || !t.is_finite()) {
        return Err(WitnessError::InvalidGrid(format!("time {t} is negative or not finite")));
    }
    if t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(WitnessError::InvalidGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

pub fn negativity_scan(
    g: &GKSGenerator,
    psi: &ComplexVector,
    phi: &ComplexVector,
    t_grid: &[f64],
) -> Result<NegativityScan> {
    negativity_scan_with_tol(g, psi, phi, t_grid, POSITIVITY_TOL)
}

/// Evolves `|ψ̂⟩⟨ψ̂|` under `γ_t ⊗ γ_t` over the grid, recording the minimum
/// eigenvalue and `G(t)` at each point.
pub fn negativity_scan_with_tol(
    g: &GKSGenerator,
    psi: &ComplexVector,
    phi: &ComplexVector,
    t_grid: &[f64],
    relative_tol: f64,
) -> Result<NegativityScan> {
    check_grid(t_grid)?;
    let ext = tensor_extension(g);
    let d2 = ext.dim();
    for v in [psi, phi] {
        if v.len() != d2 {
            return Err(WitnessError::LengthMismatch { expected: d2, found: v.len() });
        }
    }
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(WitnessError::ZeroVector);
    }
    let rho0 = vec_col(&outer(&psi.unscale(norm)));
    let points: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| -> Result<(f64, f64)> {
            let rho = if t == 0.0 {
                rho0.clone()
            } else {
                matrix_exp(&ext.matrix().scale(t))? * &rho0
            };
            let rho = hermitian_part(&unvec_col(&rho, d2, d2));
            let overlap = (phi.adjoint() * &rho * phi)[(0, 0)].re;
            let min = min_eigenvalue(&rho)?;
            Ok((min, overlap))
        })
        .collect::<Result<_>>()?;
    let tolerance = relative_tol;
    let first_negative_time = t_grid.iter().zip(&points).find(|(_, (min, _))| *min < -tolerance).map(|(t, _)| *t);
    Ok(NegativityScan {
        times: t_grid.to_vec(),
        min_eigenvalues: points.iter().map(|p| p.0).collect(),
        overlap_values: points.iter().map(|p| p.1).collect(),
        first_negative_time,
    })
}

/// `(G(h) − G(0))/h`, the forward-difference estimate of `L_{φ,ψ̂}`.
pub fn overlap_slope(g: &GKSGenerator, psi: &ComplexVector, phi: &ComplexVector, h: f64) -> Result<f64> {
    let scan = negativity_scan(g, psi, phi, &[0.0, h])?;
    Ok((scan.overlap_values[1] - scan.overlap_values[0]) / h)
}

/// Quick helper for callers holding only a superoperator: smallest eigenvalue
/// of `m[|ψ⟩⟨ψ|]`.
pub fn image_min_eigenvalue(m: &Superoperator, psi: &ComplexVector) -> Result<f64> {
    let out = m.apply(&outer(&psi.unscale(psi.norm())))?;
    Ok(linalg::min_eigenvalue(&hermitian_part(&out))?)
}
