//! The semigroup `γ_t = exp(tL)`, its two-party extension `γ_t ⊗ γ_t`,
//! Choi matrices and complete-positivity verdicts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::generator::{GKSGenerator, GeneratorError, Superoperator};
use crate::linalg::{
    self, c, hermitian_part, kron, matrix_exp, min_eigenvalue, outer, scale, trace, ComplexMatrix,
    ComplexVector, LinalgError, HERMITIAN_TOL, POSITIVITY_TOL,
};

/// Default sample times for the Choi consistency check.
pub const DEFAULT_CP_TIMES: [f64; 3] = [0.01, 0.1, 1.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("evolution time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("at least one sample time is required")]
    NoSampleTimes,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("coefficient criterion (min eigenvalue {min_c_eigenvalue:.6e}) and Choi criterion (min eigenvalue {min_choi_eigenvalue:.6e}) disagree")]
    InconsistentVerdict { min_c_eigenvalue: f64, min_choi_eigenvalue: f64 },
    #[error("state dimension {found} does not match {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a density matrix: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        linalg::ensure_hermitian(&matrix)?;
        let tr = trace(&matrix);
        if (tr - c(1.0, 0.0)).norm() > HERMITIAN_TOL * scale(&matrix) {
            return Err(DynamicsError::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -POSITIVITY_TOL * scale(&matrix) {
            return Err(DynamicsError::InvalidState(format!("eigenvalue {min:.3e} is negative")));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn from_pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(DynamicsError::InvalidState("zero or non-finite state vector".into()));
        }
        Ok(Self { matrix: outer(&psi.unscale(norm)) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

pub fn evolution_map(g: &GKSGenerator, t: f64) -> Result<Superoperator> {
    evolve_superoperator(&g.superoperator(), t)
}

/// `exp(t·s)` for a generator already in matrix form.
pub fn evolve_superoperator(s: &Superoperator, t: f64) -> Result<Superoperator> {
    if t < 0.0 || !t.is_finite() {
        return Err(DynamicsError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(Superoperator::identity(s.dim()));
    }
    let m = matrix_exp(&s.matrix().scale(t))?;
    Ok(Superoperator::new(s.dim(), m)?)
}

/// `L ⊗ I + I ⊗ L` acting on operators over `C^d ⊗ C^d`.
pub fn tensor_extension(g: &GKSGenerator) -> Superoperator {
    let s = g.superoperator();
    let id = Superoperator::identity(g.dim());
    &Superoperator::tensor(&s, &id) + &Superoperator::tensor(&id, &s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::eigenvalues(&self.matrix)?)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(min_eigenvalue(&self.matrix)?)
    }
}

/// Unnormalized `Σ_ij E_ij ⊗ m[E_ij]`.
pub fn choi_matrix(m: &Superoperator) -> ChoiMatrix {
    let d = m.dim();
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let image = linalg::unvec_col(&m.matrix().column(i + j * d).into_owned(), d, d);
            out.view_mut((i * d, j * d), (d, d)).copy_from(&image);
        }
    }
    ChoiMatrix { dim: d, matrix: out }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CPVerdict {
    pub is_cp: bool,
    /// Minimum over all sample times.
    pub min_choi_eigenvalue: f64,
    pub min_c_eigenvalue: f64,
    /// Absolute tolerance applied to the Choi spectrum.
    pub tolerance: f64,
    /// Absolute tolerance applied to the spectrum of `C`.
    pub coeff_tolerance: f64,
    pub sample_times: Vec<f64>,
}

pub fn is_completely_positive(g: &GKSGenerator, t_samples: &[f64]) -> Result<CPVerdict> {
    is_completely_positive_with_tol(g, t_samples, POSITIVITY_TOL)
}

/// Decides complete positivity from the spectrum of `C` and cross-checks
/// against the Choi spectrum of `exp(tL)` at every sample time.
pub fn is_completely_positive_with_tol(
    g: &GKSGenerator,
    t_samples: &[f64],
    relative_tol: f64,
) -> Result<CPVerdict> {
    if t_samples.is_empty() {
        return Err(DynamicsError::NoSampleTimes);
    }
    if let Some(&t) = t_samples.iter().find(|t| **t < 0.0 || !t.is_finite()) {
        return Err(DynamicsError::NegativeTime(t));
    }
    let coeff_tolerance = relative_tol * scale(g.coeff());
    let min_c_eigenvalue = g.coeff_eigenvalues()[0];

    let s = g.superoperator();
    let mut min_choi_eigenvalue = f64::INFINITY;
    let mut choi_scale: f64 = 1.0;
    for &t in t_samples {
        let choi = choi_matrix(&evolve_superoperator(&s, t)?);
        // Hermiticity-preserving maps have Hermitian Choi matrices up to roundoff
        let hermitian = hermitian_part(choi.matrix());
        choi_scale = choi_scale.max(scale(&hermitian));
        min_choi_eigenvalue = min_choi_eigenvalue.min(min_eigenvalue(&hermitian)?);
    }
    let tolerance = relative_tol * choi_scale;

    let c_says_cp = min_c_eigenvalue >= -coeff_tolerance;
    let choi_says_cp = min_choi_eigenvalue >= -tolerance;
    if c_says_cp != choi_says_cp {
        return Err(DynamicsError::InconsistentVerdict { min_c_eigenvalue, min_choi_eigenvalue });
    }
    Ok(CPVerdict {
        is_cp: c_says_cp,
        min_choi_eigenvalue,
        min_c_eigenvalue,
        tolerance,
        coeff_tolerance,
        sample_times: t_samples.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivitySample {
    pub min_eigenvalue: f64,
    /// Pure-state vector whose image attained the minimum.
    pub worst_input: ComplexVector,
    pub samples: usize,
}

pub fn positivity_preserving_sampled(m: &Superoperator, n: usize, seed: u64) -> Result<PositivitySample> {
    positivity_preserving_sampled_with(m, n, seed, &[])
}

/// Applies `m` to `n` Haar-random pure states plus any `extra` vectors and
/// reports the smallest output eigenvalue.
pub fn positivity_preserving_sampled_with(
    m: &Superoperator,
    n: usize,
    seed: u64,
    extra: &[ComplexVector],
) -> Result<PositivitySample> {
    if n == 0 {
        return Err(DynamicsError::NoSamples);
    }
    let d = m.dim();
    if let Some(v) = extra.iter().find(|v| v.len() != d) {
        return Err(DynamicsError::DimensionMismatch { expected: d, found: v.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs: Vec<ComplexVector> = extra.iter().map(|v| v.unscale(v.norm())).collect();
    inputs.extend((0..n).map(|_| linalg::random_unit_vector(&mut rng, d)));

    let results: Vec<f64> = inputs
        .par_iter()
        .map(|psi| -> Result<f64> {
            let out = m.apply(&outer(psi))?;
            Ok(min_eigenvalue(&out)?)
        })
        .collect::<Result<_>>()?;
    let (idx, &min) = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty sample");
    Ok(PositivitySample { min_eigenvalue: min, worst_input: inputs[idx].clone(), samples: inputs.len() })
}

/// `ρ_a ⊗ ρ_b`, with `a` on the first factor.
pub fn product_state(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::standard_basis;
    use crate::generator::{lindblad_to_gks, LindbladGenerator};
    use crate::linalg::{random_hermitian, C64};

    fn diag(values: &[f64]) -> ComplexMatrix {
        let n = values.len();
        ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { C64::default() })
    }

    fn random_generator(rng: &mut ChaCha8Rng, d: usize) -> GKSGenerator {
        let h = random_hermitian(rng, d);
        let h = &h - ComplexMatrix::identity(d, d) * (trace(&h) / d as f64);
        GKSGenerator::new(h, random_hermitian(rng, d * d - 1), standard_basis(d).unwrap()).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_generator(&mut rng, 2);
        assert_eq!(evolution_map(&g, 0.0).unwrap(), Superoperator::identity(2));
        let null = GKSGenerator::null(standard_basis(3).unwrap());
        assert_eq!(evolution_map(&null, 2.5).unwrap(), Superoperator::identity(3));
        assert!(matches!(evolution_map(&g, -1.0), Err(DynamicsError::NegativeTime(_))));
    }

    #[test]
    fn semigroup_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_generator(&mut rng, 3);
        let (s, t) = (0.3, 0.55);
        let lhs = evolution_map(&g, s).unwrap().compose(&evolution_map(&g, t).unwrap());
        let rhs = evolution_map(&g, s + t).unwrap();
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-9);
    }

    #[test]
    fn choi_of_identity_and_transpose() {
        let eig = choi_matrix(&Superoperator::identity(2)).eigenvalues().unwrap();
        let expected = [0.0, 0.0, 0.0, 2.0];
        for (x, y) in eig.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
        let eig = choi_matrix(&Superoperator::transpose_map(2)).eigenvalues().unwrap();
        let expected = [-1.0, 1.0, 1.0, 1.0];
        for (x, y) in eig.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn choi_layout_is_block_matrix_units() {
        // Choi of transposition is the swap operator
        let choi = choi_matrix(&Superoperator::transpose_map(2));
        let mut swap = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = c(1.0, 0.0);
            }
        }
        assert_eq!(choi.matrix(), &swap);
    }

    #[test]
    fn cp_verdict_examples() {
        let basis = standard_basis(2).unwrap();
        let dep = GKSGenerator::new(ComplexMatrix::zeros(2, 2), diag(&[1., 1., 1.]), basis.clone()).unwrap();
        assert!(is_completely_positive(&dep, &DEFAULT_CP_TIMES).unwrap().is_cp);

        let bad = GKSGenerator::new(ComplexMatrix::zeros(2, 2), diag(&[1., 1., -1.]), basis.clone()).unwrap();
        let v = is_completely_positive(&bad, &DEFAULT_CP_TIMES).unwrap();
        assert!(!v.is_cp);
        assert!((v.min_c_eigenvalue + 1.0).abs() < 1e-14);
        assert!(v.min_choi_eigenvalue < -v.tolerance);

        let sm = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.)]);
        let l = LindbladGenerator::new(2, ComplexMatrix::zeros(2, 2), vec![sm]).unwrap();
        let g = lindblad_to_gks(&l, &basis).unwrap();
        let v = is_completely_positive(&g, &DEFAULT_CP_TIMES).unwrap();
        assert!(v.is_cp);
        assert!(v.min_c_eigenvalue.abs() < 1e-10);
    }

    #[test]
    fn cp_rejects_bad_samples() {
        let g = GKSGenerator::null(standard_basis(2).unwrap());
        assert_eq!(is_completely_positive(&g, &[]), Err(DynamicsError::NoSampleTimes));
        assert!(matches!(is_completely_positive(&g, &[0.1, -0.1]), Err(DynamicsError::NegativeTime(_))));
    }

    #[test]
    fn identity_map_sampling() {
        let r = positivity_preserving_sampled(&Superoperator::identity(3), 200, 4).unwrap();
        assert!(r.min_eigenvalue >= -1e-15);
        assert_eq!(r.samples, 200);
        assert!(matches!(
            positivity_preserving_sampled(&Superoperator::identity(2), 0, 4),
            Err(DynamicsError::NoSamples)
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let m = Superoperator::tensor(&Superoperator::transpose_map(2), &Superoperator::identity(2));
        let a = positivity_preserving_sampled(&m, 50, 9).unwrap();
        let b = positivity_preserving_sampled(&m, 50, 9).unwrap();
        assert_eq!(a, b);
        // partial transpose detects entangled inputs
        assert!(a.min_eigenvalue < 0.0);
    }

    #[test]
    fn tensor_extension_on_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_generator(&mut rng, 2);
        let ext = tensor_extension(&g);
        let a = outer(&linalg::random_unit_vector(&mut rng, 2));
        let b = outer(&linalg::random_unit_vector(&mut rng, 2));
        let lhs = ext.apply(&kron(&a, &b)).unwrap();
        let rhs = kron(&g.apply(&a).unwrap(), &b) + kron(&a, &g.apply(&b).unwrap());
        assert!((lhs - rhs).norm() < 1e-12);
        let null = GKSGenerator::null(standard_basis(2).unwrap());
        assert_eq!(tensor_extension(&null), Superoperator::zero(4));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(diag(&[0.5, 0.5])).is_ok());
        assert!(DensityMatrix::new(diag(&[0.7, 0.7])).is_err());
        assert!(DensityMatrix::new(diag(&[1.5, -0.5])).is_err());
        let psi = ComplexVector::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!((trace(rho.matrix()) - c(1.0, 0.0)).norm() < 1e-15);
    }
}
