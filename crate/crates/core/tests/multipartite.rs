mod common;

use rand::Rng;
use rsdp_witness::hermitian::{DensityOperator, HermitianOperator};
use rsdp_witness::multipartite::{detect_multipartite, seesaw_min_product_n};
use rsdp_witness::random::rng_for;
use rsdp_witness::witness::{DetectSettings, VerdictKind};

use common::random_product_mixture;

#[test]
fn product_mixtures_never_fire() {
    let settings = DetectSettings::default();
    for seed in 0..200u64 {
        let mut rng = rng_for(seed, 9);
        let dims: &[usize] = if seed % 4 == 0 { &[2, 3, 2] } else { &[2, 2, 2] };
        let terms = rng.random_range(1..=6);
        let sigma = random_product_mixture(&mut rng, dims, terms);
        let out = detect_multipartite(&sigma, &settings).unwrap();
        assert_eq!(out.verdict.kind, VerdictKind::Inconclusive, "seed {seed}");
        assert!(out.cuts.iter().all(|c| c.kind == VerdictKind::Inconclusive));
    }
}

#[test]
fn lifted_witness_is_nonnegative_on_products() {
    let settings = DetectSettings::default();
    let mut rng = rng_for(77, 0);
    let rho = common::random_density(&mut rng, &[2, 2, 2]);
    let out = detect_multipartite(&rho, &settings).unwrap();
    let w = out.verdict.witness.unwrap();
    assert!(seesaw_min_product_n(w.op(), &[2, 2, 2], 10, 200, 1).unwrap().value >= -1e-7);
}

#[test]
fn maximally_mixed_is_inconclusive() {
    let mixed = DensityOperator::new(vec![2, 2, 2], HermitianOperator::identity(8).scale(0.125))
        .unwrap();
    let out = detect_multipartite(&mixed, &DetectSettings::default()).unwrap();
    assert_eq!(out.verdict.kind, VerdictKind::Inconclusive);
    assert!(out.cuts.iter().all(|c| c.value >= -1e-6));
}
