#![allow(dead_code)]

use rand::Rng;
use rsdp_witness::hermitian::{block, ComplexMatrix, DensityOperator, HermitianOperator, C64};
use rsdp_witness::lfr::{DeltaEntry, DeltaStructure, Lfr};
use rsdp_witness::random::{random_simplex, random_unit_vector};
use rsdp_witness::sdp::{LinearEquality, LmiBlock, SdpProblem};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianOperator {
    let m = random_matrix(rng, n, n);
    HermitianOperator::from_data(&m + &m.adjoint(), 1e-9).unwrap()
}

/// `G G† + shift·I`, positive definite for `shift > 0`.
pub fn random_pd(rng: &mut impl Rng, n: usize, shift: f64) -> HermitianOperator {
    let g = random_matrix(rng, n, n);
    let gg = &g * &g.adjoint();
    HermitianOperator::from_data(&gg + &ComplexMatrix::identity(n).scale_real(shift), 1e-9)
        .unwrap()
}

/// Random `(dims, ρ)` full-rank mixed state.
pub fn random_density(rng: &mut impl Rng, dims: &[usize]) -> DensityOperator {
    let n: usize = dims.iter().product();
    let p = random_pd(rng, n, 0.05);
    let t = p.trace();
    DensityOperator::new(dims.to_vec(), p.scale(1.0 / t)).unwrap()
}

/// SDP with a strictly feasible primal point and a strictly feasible dual
/// point by construction: `F0 = S0 - Σ x0_i F_i` with `S0 ≻ 0`, and
/// `c_i = Σ_b Tr(F_i Z_b) + Σ_k y_k a_ki` with `Z_b ≻ 0`.
pub fn random_feasible_sdp(
    rng: &mut impl Rng,
    vars: usize,
    block_dims: &[usize],
    equalities: usize,
) -> SdpProblem {
    let x0: Vec<f64> = (0..vars).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut objective = vec![0.0; vars];
    let mut blocks = Vec::new();
    for &d in block_dims {
        let coeffs: Vec<HermitianOperator> = (0..vars).map(|_| random_hermitian(rng, d)).collect();
        let s0 = random_pd(rng, d, 0.5);
        let mut f0 = s0.matrix().clone();
        for (f, x) in coeffs.iter().zip(&x0) {
            f0 = &f0 - &f.matrix().scale_real(*x);
        }
        let z = random_pd(rng, d, 0.5);
        for (o, f) in objective.iter_mut().zip(&coeffs) {
            *o += rsdp_witness::hermitian::trace_product(f, &z).unwrap();
        }
        blocks.push(
            LmiBlock::new(HermitianOperator::from_data(f0, 1e-9).unwrap(), coeffs).unwrap(),
        );
    }
    let eqs: Vec<LinearEquality> = (0..equalities)
        .map(|_| {
            let a: Vec<f64> = (0..vars).map(|_| rng.random_range(-1.0..1.0)).collect();
            let rhs = a.iter().zip(&x0).map(|(u, v)| u * v).sum();
            let y: f64 = rng.random_range(-1.0..1.0);
            for (o, ai) in objective.iter_mut().zip(&a) {
                *o += y * ai;
            }
            LinearEquality {
                coefficients: a,
                rhs,
            }
        })
        .collect();
    SdpProblem::new(objective, blocks, eqs).unwrap()
}

/// Hermitian `W` meeting every pairwise constraint strictly: random
/// off-diagonal blocks, diagonal blocks large enough to dominate them,
/// normalised to unit trace.
pub fn constructed_feasible_witness(rng: &mut impl Rng, d_a: usize, d_b: usize) -> HermitianOperator {
    let n = d_a * d_b;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..d_a {
        for j in (k + 1)..d_a {
            let off = random_matrix(rng, d_b, d_b);
            m.set_submatrix(k * d_b, j * d_b, &off);
            m.set_submatrix(j * d_b, k * d_b, &off.adjoint());
        }
    }
    let probe = HermitianOperator::from_data(m.clone(), 1e-9).unwrap();
    let mut bound = 0.0f64;
    for k in 0..d_a {
        for j in 0..d_a {
            if j == k {
                continue;
            }
            let wkj = block(&probe, k, j, d_a, d_b).unwrap();
            let wjk = block(&probe, j, k, d_a, d_b).unwrap();
            let re = HermitianOperator::from_data(&wkj + &wjk, 1e-9).unwrap();
            let im = HermitianOperator::from_data((&wkj - &wjk).scale(c(0.0, -1.0)), 1e-9).unwrap();
            for h in [re, im] {
                let e = h.eigenvalues();
                bound = bound.max(e[0].abs()).max(e[e.len() - 1].abs());
            }
        }
    }
    let diag_scale = (d_a as f64 - 1.0).max(1.0) * std::f64::consts::FRAC_1_SQRT_2 * bound;
    for k in 0..d_a {
        let extra = random_pd(rng, d_b, 0.1);
        let dk = &ComplexMatrix::identity(d_b).scale_real(diag_scale * 1.01) + extra.matrix();
        m.set_submatrix(k * d_b, k * d_b, &dk);
    }
    let w = HermitianOperator::from_data(m, 1e-9).unwrap();
    let t = w.trace();
    w.scale(1.0 / t)
}

/// Random LFR with `size` uncertainty channels spread over `params`
/// coefficients; `D` scaled down so the map stays well posed near the unit
/// ball.
pub fn random_lfr(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    params: usize,
    reps: &[usize],
) -> Lfr {
    let entries: Vec<DeltaEntry> = reps
        .iter()
        .enumerate()
        .map(|(k, &r)| DeltaEntry {
            param: k % params,
            conjugated: rng.random_bool(0.5),
            repetition: r,
        })
        .collect();
    let structure = DeltaStructure::new(entries).unwrap();
    let size = structure.size();
    Lfr::new(
        random_matrix(rng, rows, cols),
        random_matrix(rng, rows, size),
        random_matrix(rng, size, cols),
        random_matrix(rng, size, size).scale_real(0.2 / size as f64),
        structure,
    )
    .unwrap()
}

/// Convex mixture of `terms` random product pure states.
pub fn random_product_mixture(rng: &mut impl Rng, dims: &[usize], terms: usize) -> DensityOperator {
    let weights = random_simplex(rng, terms);
    let n: usize = dims.iter().product();
    let mut acc = ComplexMatrix::zeros(n, n);
    for p in weights {
        let v = dims
            .iter()
            .map(|&d| random_unit_vector(rng, d))
            .reduce(|a, b| rsdp_witness::hermitian::kron_vec(&a, &b))
            .unwrap();
        acc = &acc + &ComplexMatrix::outer(&v, &v).scale_real(p);
    }
    DensityOperator::new(dims.to_vec(), HermitianOperator::from_data(acc, 1e-9).unwrap()).unwrap()
}
