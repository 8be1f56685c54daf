use proptest::prelude::*;

use cplab::basis::standard_basis;
use cplab::dynamics::{evolution_map, is_completely_positive};
use cplab::generator::{gks_to_lindblad, GKSGenerator};
use cplab::linalg::{c, hermitian_part, similarity_to_transpose, trace, ComplexMatrix, C64};
use cplab::witness::{construct_witness, WitnessOutcome};

fn complex_entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n)
}

fn square(d: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    ComplexMatrix::from_iterator(d, d, entries.iter().map(|&(re, im)| c(re, im)))
}

fn hermitian(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    hermitian_part(&square(n, entries))
}

fn traceless(d: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    let h = hermitian(d, entries);
    let t = trace(&h) / d as f64;
    h - ComplexMatrix::identity(d, d) * t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarity_residual_is_small(d in 2usize..=4, seed in any::<u64>()) {
        let entries: Vec<(f64, f64)> = (0..d * d)
            .map(|k| {
                let x = seed.rotate_left(k as u32 * 7) as f64 / u64::MAX as f64;
                (x * 4.0 - 2.0, (1.0 - x) * 3.0 - 1.5)
            })
            .collect();
        let w = square(d, &entries);
        let phi = similarity_to_transpose(&w).unwrap();
        let inv = phi.clone().try_inverse().unwrap();
        prop_assert!((inv * &w * &phi - w.transpose()).norm() <= 1e-8 * w.norm().max(1.0));
    }

    #[test]
    fn similarity_is_scale_invariant(entries in complex_entries(9), k in 0.01f64..100.0) {
        let w = square(3, &entries);
        let phi = similarity_to_transpose(&(&w * C64::from(k))).unwrap();
        let inv = phi.clone().try_inverse().unwrap();
        prop_assert!((inv * &w * &phi - w.transpose()).norm() <= 1e-8 * w.norm().max(1.0));
    }

    #[test]
    fn evolution_preserves_trace_and_hermiticity(
        h in complex_entries(4),
        cm in complex_entries(9),
        t in 0.0f64..3.0,
    ) {
        let coeff = hermitian(3, &cm);
        let g = GKSGenerator::new(traceless(2, &h), coeff, standard_basis(2).unwrap()).unwrap();
        let rho = ComplexMatrix::from_row_slice(2, 2, &[c(0.6, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.)]);
        let out = evolution_map(&g, t).unwrap().apply(&rho).unwrap();
        let growth = (g.superoperator().matrix().norm() * t).exp();
        prop_assert!((trace(&out) - c(1.0, 0.0)).norm() <= 1e-10 * growth);
        prop_assert!((&out - out.adjoint()).norm() <= 1e-10 * growth);
    }

    #[test]
    fn verdict_witness_and_conversion_agree(cm in complex_entries(9)) {
        let coeff = hermitian(3, &cm);
        let g = GKSGenerator::new(ComplexMatrix::zeros(2, 2), coeff, standard_basis(2).unwrap()).unwrap();
        let verdict = is_completely_positive(&g, &[0.01, 0.1]).unwrap();
        let witness = construct_witness(&g).unwrap();
        prop_assert_eq!(verdict.is_cp, matches!(witness, WitnessOutcome::NoNegativeDirection { .. }));
        prop_assert_eq!(verdict.is_cp, gks_to_lindblad(&g).is_ok());
        if let WitnessOutcome::Found(w) = witness {
            prop_assert!(w.value < 0.0);
        }
    }
}
