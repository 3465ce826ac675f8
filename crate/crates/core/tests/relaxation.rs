mod common;

use rand::Rng;
use rsdp_witness::fixtures;
use rsdp_witness::hermitian::{trace_product, DensityOperator, HermitianOperator};
use rsdp_witness::lfr::witness_structure;
use rsdp_witness::random::{random_unit_vector, rng_for};
use rsdp_witness::sdp::SolveStatus;
use rsdp_witness::sprocedure::{
    build_sprocedure_sdp, check_multiplier, detect_with_sprocedure, simple_multiplier,
};
use rsdp_witness::witness::{
    detect_entanglement, evaluate_robust_constraint, pairwise_constraints, sample_separable,
    seesaw_min_product, DetectSettings, VerdictKind,
};

use common::{c, constructed_feasible_witness, random_density, random_product_mixture};

fn min_robust(w: &HermitianOperator, d_a: usize, d_b: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = rng_for(seed, 1);
    (0..samples)
        .map(|_| {
            let a = random_unit_vector(&mut rng, d_a);
            evaluate_robust_constraint(w, d_a, d_b, &a).unwrap().min_eigenvalue()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn separable_mixtures_never_detected() {
    let settings = DetectSettings::default();
    let mut rng = rng_for(500, 0);
    for (d_a, d_b) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        for _ in 0..5 {
            let terms = rng.random_range(1..=d_a * d_b);
            let sigma = random_product_mixture(&mut rng, &[d_a, d_b], terms);
            let v = detect_entanglement(&sigma, &settings).unwrap();
            assert_ne!(v.kind, VerdictKind::Entangled, "value {}", v.value);
        }
    }
}

#[test]
fn returned_witnesses_are_block_positive() {
    let settings = DetectSettings::default();
    let mut rng = rng_for(501, 0);
    for (d_a, d_b) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        let rho = random_density(&mut rng, &[d_a, d_b]);
        let v = detect_entanglement(&rho, &settings).unwrap();
        let w = v.witness.unwrap();
        assert!(min_robust(w.op(), d_a, d_b, 300, 1) >= -1e-7);
        assert!(seesaw_min_product(w.op(), d_a, d_b, 5, 200, 2).unwrap().value >= -1e-7);
        for seed in 0..50 {
            let sigma = sample_separable(&[d_a, d_b], 4, seed).unwrap();
            assert!(trace_product(w.op(), sigma.op()).unwrap() >= -1e-7);
        }
    }
}

#[test]
fn feasible_witnesses_decompose() {
    let mut rng = rng_for(502, 0);
    for d_a in [2, 3, 4] {
        for d_b in [2, 3, 4] {
            let w = constructed_feasible_witness(&mut rng, d_a, d_b);
            let worst = pairwise_constraints(&w, d_a, d_b)
                .unwrap()
                .iter()
                .map(HermitianOperator::min_eigenvalue)
                .fold(f64::INFINITY, f64::min);
            assert!(worst > 0.0);
            for _ in 0..30 {
                let a: Vec<_> = (0..d_a)
                    .map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                    .collect();
                let m = evaluate_robust_constraint(&w, d_a, d_b, &a).unwrap();
                assert!(m.min_eigenvalue() >= -1e-9);
            }
        }
    }
}

#[test]
fn robust_constraint_is_homogeneous() {
    let mut rng = rng_for(503, 0);
    let w = common::random_hermitian(&mut rng, 6);
    let a = random_unit_vector(&mut rng, 3);
    let lambda = c(-0.7, 1.9);
    let base = evaluate_robust_constraint(&w, 3, 2, &a).unwrap();
    let scaled: Vec<_> = a.iter().map(|z| z * lambda).collect();
    let got = evaluate_robust_constraint(&w, 3, 2, &scaled).unwrap();
    let want = base.matrix().scale_real(lambda.norm_sqr());
    assert!(got.matrix().max_abs_diff(&want) < 1e-12);
}

#[test]
fn relaxation_never_beats_optimal_witness() {
    let bell = fixtures::bell_state();
    let v = detect_entanglement(&bell, &DetectSettings::default()).unwrap();
    assert!(v.value >= -0.5);
    assert!((trace_product(&fixtures::bell_oew(), bell.op()).unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn sprocedure_optima_are_sound() {
    let settings = DetectSettings::default();
    let n = witness_structure(2, 2).size();
    let p = simple_multiplier(n);
    assert!(check_multiplier(&p, &witness_structure(2, 2), 1000, 0).unwrap().ok);
    let mut rng = rng_for(504, 0);
    let mut states: Vec<DensityOperator> =
        vec![fixtures::bell_state(), fixtures::rho_ab(), fixtures::sigma_ab()];
    states.extend((0..3).map(|_| random_density(&mut rng, &[2, 2])));
    for rho in &states {
        let problem = build_sprocedure_sdp(rho, &p).unwrap();
        assert_eq!(problem.num_vars(), 16);
        let v = detect_with_sprocedure(rho, &p, &settings, 1000, 0).unwrap();
        match v.witness {
            Some(w) => {
                assert_eq!(v.certificates.unwrap().status, SolveStatus::Optimal);
                assert!(v.value >= -0.5 - 1e-6);
                assert!(min_robust(w.op(), 2, 2, 1000, 3) >= -1e-7);
            }
            None => assert_eq!(v.kind, VerdictKind::Inconclusive),
        }
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;
    use rsdp_witness::hermitian::{partial_transpose_op, permute_subsystems, ComplexMatrix};
    use rsdp_witness::lfr::witness_lfr;

    fn hermitian(n: usize) -> impl Strategy<Value = HermitianOperator> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let m = ComplexMatrix::from_fn(n, n, |r, k| c(v[r * n + k].0, v[r * n + k].1));
            HermitianOperator::from_data(&m + &m.adjoint(), 1e-9).unwrap()
        })
    }

    fn coeffs(n: usize) -> impl Strategy<Value = Vec<rsdp_witness::hermitian::C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
            .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect())
    }

    proptest! {
        #[test]
        fn partial_transpose_is_involution(w in hermitian(6)) {
            let once = partial_transpose_op(&w, &[2, 3], 1).unwrap();
            let twice = partial_transpose_op(&once, &[2, 3], 1).unwrap();
            prop_assert_eq!(twice, w.clone());
            prop_assert!((once.trace() - w.trace()).abs() < 1e-12);
        }

        #[test]
        fn swap_twice_is_identity(w in hermitian(6)) {
            let swapped = permute_subsystems(&w, &[2, 3], &[1, 0]).unwrap();
            let back = permute_subsystems(&swapped, &[3, 2], &[1, 0]).unwrap();
            prop_assert_eq!(back, w);
        }

        #[test]
        fn lfr_matches_contraction(w in hermitian(6), a in coeffs(3)) {
            let f = witness_lfr(&w, 3, 2).unwrap().eval(&a).unwrap();
            let g = evaluate_robust_constraint(&w, 3, 2, &a).unwrap();
            prop_assert!(f.max_abs_diff(g.matrix()) < 1e-12);
        }

        #[test]
        fn spectrum_sums_to_trace(w in hermitian(5)) {
            let s: f64 = w.eigenvalues().iter().sum();
            prop_assert!((s - w.trace()).abs() < 1e-10);
        }
    }
}
