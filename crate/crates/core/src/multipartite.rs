//! Multipartite constraint evaluation, n-party see-saw, and detection of
//! entanglement across bipartite cuts.
//!
//! A witness for a cut `L | R` is non-negative on every `L`-`R` product
//! state and therefore on every fully separable state, so a negative cut
//! value excludes full separability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    digits, permute_subsystems, ComplexMatrix, DensityOperator, HermitianOperator, C64,
};
use crate::random::{random_unit_vector, rng_for};
use crate::witness::{
    detect_entanglement, min_eigvec, DetectSettings, ProductState, SeesawOutcome, Verdict,
    VerdictKind, Witness, SEESAW_TOL,
};

fn check_dims(w: &HermitianOperator, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if w.dim() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {} does not match dims {dims:?}",
            w.dim()
        )));
    }
    Ok(())
}

/// `d_keep × d_keep` matrix `(⊗_{m≠keep} <v_m| ⊗ I) W (⊗_{m≠keep} |v_m> ⊗ I)`,
/// with the identity sitting in slot `keep`. `vectors[keep]` is ignored.
fn contract_except(
    w: &HermitianOperator,
    dims: &[usize],
    vectors: &[&[C64]],
    keep: usize,
) -> ComplexMatrix {
    let n = w.dim();
    let mut slot = Vec::with_capacity(n);
    let mut amp = Vec::with_capacity(n);
    for idx in 0..n {
        let d = digits(idx, dims);
        let a = d
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != keep)
            .fold(C64::new(1.0, 0.0), |acc, (m, &x)| acc * vectors[m][x]);
        slot.push(d[keep]);
        amp.push(a);
    }
    let d = dims[keep];
    let m = w.matrix();
    let mut acc = vec![C64::new(0.0, 0.0); d * d];
    for r in 0..n {
        if amp[r] == C64::new(0.0, 0.0) {
            continue;
        }
        let ar = amp[r].conj();
        for c in 0..n {
            acc[slot[r] * d + slot[c]] += ar * m[(r, c)] * amp[c];
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| acc[i * d + j])
}

/// Contracts subsystems `1..n-1` of `w` with the coefficient vectors,
/// leaving an operator on the last subsystem. Each index runs over its own
/// subsystem dimension.
pub fn evaluate_multipartite_constraint(
    w: &HermitianOperator,
    coeffs: &[Vec<C64>],
    dims: &[usize],
) -> Result<HermitianOperator> {
    if dims.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "need at least two subsystems, got {dims:?}"
        )));
    }
    check_dims(w, dims)?;
    if coeffs.len() != dims.len() - 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficient vectors for {} subsystems",
            coeffs.len(),
            dims.len()
        )));
    }
    for (k, (c, &d)) in coeffs.iter().zip(dims).enumerate() {
        if c.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector {k} has length {}, subsystem dimension is {d}",
                c.len()
            )));
        }
    }
    let mut vectors: Vec<&[C64]> = coeffs.iter().map(Vec::as_slice).collect();
    vectors.push(&[]);
    let out = contract_except(w, dims, &vectors, dims.len() - 1);
    HermitianOperator::from_data(out, f64::INFINITY)
}

/// Cyclic minimisation of `<ψ_1...ψ_n|W|ψ_1...ψ_n>` over unit factors, each
/// step replacing one factor by the lowest eigenvector of the contraction
/// against the others. Restart `r` draws its starting factors in order from
/// stream `r`, so for two parties this follows
/// [`crate::witness::seesaw_min_product`] step for step.
pub fn seesaw_min_product_n(
    w: &HermitianOperator,
    dims: &[usize],
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<SeesawOutcome> {
    if dims.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "need at least two subsystems, got {dims:?}"
        )));
    }
    check_dims(w, dims)?;
    let mut best: Option<SeesawOutcome> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng_for(seed, r as u64);
        let mut factors: Vec<Vec<C64>> =
            dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect();
        let mut trajectory = Vec::new();
        let mut value = f64::INFINITY;
        for _ in 0..iters.max(1) {
            let mut v = value;
            for k in 0..dims.len() {
                let views: Vec<&[C64]> = factors.iter().map(Vec::as_slice).collect();
                let (val, vec) = min_eigvec(contract_except(w, dims, &views, k));
                factors[k] = vec;
                v = val;
            }
            let improved = value - v;
            value = v;
            trajectory.push(v);
            if improved.abs() < SEESAW_TOL {
                break;
            }
        }
        if best.as_ref().is_none_or(|o| value < o.value) {
            best = Some(SeesawOutcome {
                value,
                state: ProductState::new(factors)?,
                trajectory,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Bipartition of subsystem indices; both sides keep ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Cut {
    pub fn new(left: Vec<usize>, right: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &k in left.iter().chain(&right) {
            if k >= n || std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidProblem(format!(
                    "{left:?} | {right:?} is not a partition of {n} subsystems"
                )));
            }
        }
        if left.is_empty() || right.is_empty() || seen.contains(&false) {
            return Err(Error::InvalidProblem(format!(
                "{left:?} | {right:?} is not a partition of {n} subsystems"
            )));
        }
        let (mut left, mut right) = (left, right);
        left.sort_unstable();
        right.sort_unstable();
        Ok(Self { left, right })
    }

    /// Subsystem order putting the left group first.
    pub fn order(&self) -> Vec<usize> {
        self.left.iter().chain(&self.right).copied().collect()
    }

    pub fn flat_dims(&self, dims: &[usize]) -> (usize, usize) {
        (
            self.left.iter().map(|&k| dims[k]).product(),
            self.right.iter().map(|&k| dims[k]).product(),
        )
    }
}

/// All `2^{n-1} - 1` cuts, subsystem 0 always on the left, ordered by the
/// bitmask of the remaining left members.
pub fn all_cuts(n: usize) -> Vec<Cut> {
    if n < 2 {
        return Vec::new();
    }
    (0..(1usize << (n - 1)) - 1)
        .map(|mask| {
            let (left, right): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&k| k == 0 || mask & (1 << (k - 1)) != 0);
            Cut { left, right }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutOutcome {
    pub cut: Cut,
    pub value: f64,
    pub kind: VerdictKind,
}

#[derive(Clone, Debug)]
pub struct MultipartiteVerdict {
    /// Overall verdict; its value is the minimum over cuts and its witness
    /// belongs to that cut, lifted back to the original subsystem order.
    pub verdict: Verdict,
    pub cuts: Vec<CutOutcome>,
}

pub const CUTS_METHOD: &str = "cuts";

/// Runs the pairwise relaxation on every cut. Solver failures on any cut
/// are returned as errors.
pub fn detect_multipartite(
    rho: &DensityOperator,
    settings: &DetectSettings,
) -> Result<MultipartiteVerdict> {
    let dims = rho.dims();
    if dims.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "need at least two subsystems, got {dims:?}"
        )));
    }
    let mut cuts = Vec::new();
    let mut best: Option<Verdict> = None;
    for cut in all_cuts(dims.len()) {
        let order = cut.order();
        let (d_l, d_r) = cut.flat_dims(dims);
        let permuted = permute_subsystems(rho.op(), dims, &order)?;
        let flat = DensityOperator::new(vec![d_l, d_r], permuted)?;
        let mut v = detect_entanglement(&flat, settings)?;
        cuts.push(CutOutcome {
            cut: cut.clone(),
            value: v.value,
            kind: v.kind,
        });
        if best.as_ref().is_none_or(|b| v.value < b.value) {
            if let Some(w) = v.witness.take() {
                let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
                let mut inverse = vec![0; order.len()];
                for (k, &src) in order.iter().enumerate() {
                    inverse[src] = k;
                }
                let lifted = permute_subsystems(w.op(), &new_dims, &inverse)?;
                v.witness = Some(Witness::for_state(lifted, rho)?);
            }
            best = Some(v);
        }
    }
    let mut verdict = best.expect("at least one cut");
    verdict.method = CUTS_METHOD.to_string();
    Ok(MultipartiteVerdict { verdict, cuts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::witness::{evaluate_robust_constraint, seesaw_min_product};
    use rand::Rng;

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianOperator {
        let a = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        HermitianOperator::from_data(&a + &a.adjoint(), 1e-9).unwrap()
    }

    fn random_vec(rng: &mut impl Rng, d: usize) -> Vec<C64> {
        (0..d)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn nested_sum_oracle_three_qubits() {
        let mut rng = rng_for(11, 0);
        for _ in 0..20 {
            let w = random_hermitian(&mut rng, 8);
            let a = random_vec(&mut rng, 2);
            let b = random_vec(&mut rng, 2);
            let got = evaluate_multipartite_constraint(&w, &[a.clone(), b.clone()], &[2, 2, 2])
                .unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    let mut want = C64::new(0.0, 0.0);
                    for i1 in 0..2 {
                        for i2 in 0..2 {
                            for j1 in 0..2 {
                                for j2 in 0..2 {
                                    want += a[i1].conj()
                                        * b[i2].conj()
                                        * a[j1]
                                        * b[j2]
                                        * w.matrix()[(i1 * 4 + i2 * 2 + r, j1 * 4 + j2 * 2 + c)];
                                }
                            }
                        }
                    }
                    assert!((got.matrix()[(r, c)] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn constraint_examples() {
        let mut rng = rng_for(12, 0);
        let w = random_hermitian(&mut rng, 12);
        let e0 = |d: usize| {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[0] = C64::new(1.0, 0.0);
            v
        };
        let got = evaluate_multipartite_constraint(&w, &[e0(2), e0(3)], &[2, 3, 2]).unwrap();
        assert!(got.matrix().max_abs_diff(&w.matrix().submatrix(0, 0, 2, 2)) < 1e-15);

        let flat = HermitianOperator::identity(12).scale(1.0 / 12.0);
        let a = random_unit_vector(&mut rng, 2);
        let b = random_unit_vector(&mut rng, 3);
        let got = evaluate_multipartite_constraint(&flat, &[a, b], &[2, 3, 2]).unwrap();
        assert!(got.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(1.0 / 12.0)) < 1e-14);

        assert!(evaluate_multipartite_constraint(&w, &[e0(3), e0(3)], &[2, 3, 2]).is_err());
        assert!(evaluate_multipartite_constraint(&w, &[e0(2)], &[2, 3, 2]).is_err());
    }

    #[test]
    fn reduces_to_bipartite_and_is_homogeneous() {
        let mut rng = rng_for(13, 0);
        for _ in 0..10 {
            let w = random_hermitian(&mut rng, 6);
            let a = random_vec(&mut rng, 3);
            let multi = evaluate_multipartite_constraint(&w, std::slice::from_ref(&a), &[3, 2]).unwrap();
            let bi = evaluate_robust_constraint(&w, 3, 2, &a).unwrap();
            assert!(multi.matrix().max_abs_diff(bi.matrix()) < 1e-12);

            let w8 = random_hermitian(&mut rng, 8);
            let b = random_vec(&mut rng, 2);
            let c = random_vec(&mut rng, 2);
            let lambda = C64::new(0.3, -1.2);
            let base = evaluate_multipartite_constraint(&w8, &[b.clone(), c.clone()], &[2, 2, 2])
                .unwrap();
            let scaled: Vec<C64> = b.iter().map(|z| z * lambda).collect();
            let got = evaluate_multipartite_constraint(&w8, &[scaled, c], &[2, 2, 2]).unwrap();
            let want = base.matrix().scale_real(lambda.norm_sqr());
            assert!(got.matrix().max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn cut_enumeration() {
        let cuts = all_cuts(3);
        assert_eq!(cuts.len(), 3);
        assert_eq!(cuts[0], Cut { left: vec![0], right: vec![1, 2] });
        assert_eq!(cuts[1], Cut { left: vec![0, 1], right: vec![2] });
        assert_eq!(cuts[2], Cut { left: vec![0, 2], right: vec![1] });
        assert_eq!(all_cuts(4).len(), 7);
        assert_eq!(cuts[2].flat_dims(&[2, 3, 4]), (8, 3));
        assert!(Cut::new(vec![0], vec![0, 1], 2).is_err());
        assert!(Cut::new(vec![], vec![0, 1], 2).is_err());
        assert!(Cut::new(vec![1], vec![0], 3).is_err());
    }

    #[test]
    fn seesaw_examples() {
        let flat = HermitianOperator::identity(8).scale(1.0 / 8.0);
        let out = seesaw_min_product_n(&flat, &[2, 2, 2], 3, 20, 0).unwrap();
        assert!((out.value - 0.125).abs() < 1e-14);

        let mut rng = rng_for(14, 0);
        for seed in 0..5 {
            let w = random_hermitian(&mut rng, 6);
            let n = seesaw_min_product_n(&w, &[2, 3], 4, 50, seed).unwrap();
            let b = seesaw_min_product(&w, 2, 3, 4, 50, seed).unwrap();
            assert!((n.value - b.value).abs() < 1e-12, "{} vs {}", n.value, b.value);
        }
    }

    #[test]
    fn ghz_detected_and_mixed_inconclusive() {
        let settings = DetectSettings::default();
        let ghz = detect_multipartite(&fixtures::ghz_state(), &settings).unwrap();
        assert_eq!(ghz.verdict.kind, VerdictKind::Entangled);
        assert_eq!(ghz.cuts.len(), 3);
        let w = ghz.verdict.witness.as_ref().unwrap();
        assert_eq!(w.dims(), &[2, 2, 2]);
        assert!((w.objective() - ghz.verdict.value).abs() < 1e-9);
        let ss = seesaw_min_product_n(w.op(), &[2, 2, 2], 10, 200, 0).unwrap();
        assert!(ss.value >= -1e-7, "{}", ss.value);

        let mixed = DensityOperator::new(vec![2, 2, 2], HermitianOperator::identity(8).scale(0.125))
            .unwrap();
        let out = detect_multipartite(&mixed, &settings).unwrap();
        assert_eq!(out.verdict.kind, VerdictKind::Inconclusive);
        assert!(out.cuts.iter().all(|c| c.value >= -1e-6));
    }
}
