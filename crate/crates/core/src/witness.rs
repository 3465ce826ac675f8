//! Entanglement witnesses from the pairwise block relaxation of the robust
//! witness problem.
//!
//! A Hermitian `W` on `H_A ⊗ H_B` is block positive iff
//! `Σ_ij a_i* a_j W_ij ⪰ 0` for every `a ∈ C^{d_A}`. That quantified
//! constraint is intractable in general, so it is replaced by finitely many
//! `d_B × d_B` LMIs per ordered pair `k ≠ j`:
//!
//! ```text
//! W_kk ⪰ 0
//! W_kk/(d_A-1) ± (√2/2)(W_kj + W_jk)   ⪰ 0
//! W_kk/(d_A-1) ± (√2/2i)(W_kj - W_jk)  ⪰ 0
//! ```
//!
//! Every feasible `W` is block positive, so a negative optimum of
//! `min Tr(Wρ)` with `Tr W = 1` proves `ρ` entangled. A non-negative
//! optimum proves nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    block, partial_transpose, trace_product, ComplexMatrix, DensityOperator, HermitianOperator,
    C64,
};
use crate::random::{random_simplex, random_unit_vector, rng_for};
use crate::sdp::{
    self, HermitianVariable, LinearEquality, LmiBlock, SdpProblem, SdpSolution, SolveStatus,
    SolverSettings,
};

/// Optimum below `-DETECT_EPS` counts as detection.
pub const DETECT_EPS: f64 = 1e-6;
/// Tolerance on `Tr W = 1`.
pub const WITNESS_TRACE_TOL: f64 = 1e-9;
/// PPT iff the partial transpose has no eigenvalue below `-PPT_TOL`.
pub const PPT_TOL: f64 = 1e-9;

/// Unit-trace Hermitian operator together with its value on the state it was
/// built for.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    op: HermitianOperator,
    dims: Vec<usize>,
    objective: f64,
}

impl Witness {
    /// Wraps `op` and records `Tr(op · rho)`.
    pub fn for_state(op: HermitianOperator, rho: &DensityOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > WITNESS_TRACE_TOL {
            return Err(Error::InvalidWitness(format!(
                "trace must equal 1 (got {trace})"
            )));
        }
        let objective = trace_product(&op, rho.op())?;
        Ok(Self {
            op,
            dims: rho.dims().to_vec(),
            objective,
        })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `Tr(Wρ)` against the originating state.
    pub fn objective(&self) -> f64 {
        self.objective
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Entangled,
    Inconclusive,
}

/// Solver certificates carried alongside a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub equality_residual: f64,
    pub iterations: usize,
}

impl From<&SdpSolution> for SolveSummary {
    fn from(s: &SdpSolution) -> Self {
        Self {
            status: s.status,
            duality_gap: s.duality_gap,
            primal_residual: s.primal_residual,
            equality_residual: s.equality_residual,
            iterations: s.iterations,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Relaxation optimum.
    pub value: f64,
    pub witness: Option<Witness>,
    pub method: String,
    pub certificates: Option<SolveSummary>,
}

impl Verdict {
    pub fn is_entangled(&self) -> bool {
        self.kind == VerdictKind::Entangled
    }
}

pub fn classify(value: f64, detect_eps: f64) -> VerdictKind {
    if value < -detect_eps {
        VerdictKind::Entangled
    } else {
        VerdictKind::Inconclusive
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectSettings {
    pub solver: SolverSettings,
    pub detect_eps: f64,
}

impl Default for DetectSettings {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            detect_eps: DETECT_EPS,
        }
    }
}

/// Layout of the witness variable in every witness SDP: one Hermitian
/// `d × d` matrix starting at coordinate 0.
pub fn witness_variable(dim: usize) -> HermitianVariable {
    HermitianVariable::new(dim, 0)
}

/// Number of LMI blocks in the pairwise relaxation for a given `d_A`.
pub fn pairwise_block_count(d_a: usize) -> usize {
    d_a + 4 * d_a * (d_a - 1)
}

/// Evaluates each LMI of the pairwise relaxation at `w`. The same linear map
/// builds the SDP, so `w` is feasible iff every returned matrix is PSD.
pub fn pairwise_constraints(
    w: &HermitianOperator,
    d_a: usize,
    d_b: usize,
) -> Result<Vec<HermitianOperator>> {
    if d_a < 2 {
        return Err(Error::InvalidProblem(format!(
            "pairwise relaxation needs d_A ≥ 2, got {d_a}"
        )));
    }
    let blocks: Vec<Vec<ComplexMatrix>> = (0..d_a)
        .map(|i| (0..d_a).map(|j| block(w, i, j, d_a, d_b)).collect())
        .collect::<Result<_>>()?;
    let inv = 1.0 / (d_a - 1) as f64;
    let half_root2 = std::f64::consts::FRAC_1_SQRT_2;
    let herm = |m: ComplexMatrix| {
        HermitianOperator::from_data(m, f64::INFINITY).expect("square by construction")
    };

    let mut out = Vec::with_capacity(pairwise_block_count(d_a));
    for k in 0..d_a {
        out.push(herm(blocks[k][k].clone()));
    }
    for k in 0..d_a {
        let diag = blocks[k][k].scale_real(inv);
        for j in (0..d_a).filter(|&j| j != k) {
            let sym = &blocks[k][j] + &blocks[j][k];
            // (W_kj - W_jk)/i
            let anti = (&blocks[k][j] - &blocks[j][k]).scale(C64::new(0.0, -1.0));
            for sign in [1.0, -1.0] {
                out.push(herm(&diag + &sym.scale_real(sign * half_root2)));
                out.push(herm(&diag + &anti.scale_real(sign * half_root2)));
            }
        }
    }
    Ok(out)
}

/// The pairwise-relaxation SDP over `W` (coordinates from
/// [`witness_variable`]): minimise `Tr(Wρ)` with `Tr W = 1`.
pub fn build_theorem2(rho: &DensityOperator) -> Result<SdpProblem> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    let var = witness_variable(d_a * d_b);
    let basis = var.basis();
    let per_basis: Vec<Vec<HermitianOperator>> = basis
        .iter()
        .map(|e| pairwise_constraints(e, d_a, d_b))
        .collect::<Result<_>>()?;
    let blocks = (0..pairwise_block_count(d_a))
        .map(|b| {
            LmiBlock::new(
                HermitianOperator::zeros(d_b),
                per_basis.iter().map(|c| c[b].clone()).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    witness_problem(rho, &basis, blocks)
}

/// Objective `Tr(Wρ)` and normalisation `Tr W = 1` over the standard
/// witness variable, with caller-supplied LMI blocks.
pub(crate) fn witness_problem(
    rho: &DensityOperator,
    basis: &[HermitianOperator],
    blocks: Vec<LmiBlock>,
) -> Result<SdpProblem> {
    let objective = basis
        .iter()
        .map(|e| trace_product(e, rho.op()))
        .collect::<Result<Vec<_>>>()?;
    let trace_row = basis.iter().map(|e| e.trace()).collect();
    SdpProblem::new(
        objective,
        blocks,
        vec![LinearEquality {
            coefficients: trace_row,
            rhs: 1.0,
        }],
    )
}

/// Solves a witness SDP and turns the optimum into a verdict. Solver
/// failures surface as errors, never as an inconclusive verdict.
pub(crate) fn verdict_from_problem(
    rho: &DensityOperator,
    problem: &SdpProblem,
    settings: &DetectSettings,
    method: &str,
) -> Result<Verdict> {
    let sol = sdp::solve(problem, &settings.solver)?;
    verdict_from_solution(rho, &sol, settings, method)
}

pub(crate) fn verdict_from_solution(
    rho: &DensityOperator,
    sol: &SdpSolution,
    settings: &DetectSettings,
    method: &str,
) -> Result<Verdict> {
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver { status: sol.status });
    }
    let op = witness_variable(rho.dim()).assemble(&sol.x);
    let witness = Witness::for_state(op, rho)?;
    Ok(Verdict {
        kind: classify(sol.objective, settings.detect_eps),
        value: sol.objective,
        witness: Some(witness),
        method: method.to_string(),
        certificates: Some(SolveSummary::from(sol)),
    })
}

pub fn detect_entanglement(rho: &DensityOperator, settings: &DetectSettings) -> Result<Verdict> {
    let problem = build_theorem2(rho)?;
    verdict_from_problem(rho, &problem, settings, "theorem2")
}

/// `Σ_ij a_i* a_j W_ij`, the operator on `H_B` left after contracting `H_A`
/// with `Σ_i a_i |i>`.
pub fn evaluate_robust_constraint(
    w: &HermitianOperator,
    d_a: usize,
    d_b: usize,
    a: &[C64],
) -> Result<HermitianOperator> {
    if a.len() != d_a {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector of length {} for d_A = {d_a}",
            a.len()
        )));
    }
    if w.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {} is not {d_a}·{d_b}",
            w.dim()
        )));
    }
    let mut acc = ComplexMatrix::zeros(d_b, d_b);
    for i in 0..d_a {
        for j in 0..d_a {
            let coeff = a[i].conj() * a[j];
            if coeff != C64::new(0.0, 0.0) {
                acc = &acc + &block(w, i, j, d_a, d_b)?.scale(coeff);
            }
        }
    }
    HermitianOperator::from_data(acc, f64::INFINITY)
}

/// Product vector `|ψ_1> ⊗ ... ⊗ |ψ_n>` with unit-norm factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    factors: Vec<Vec<C64>>,
}

impl ProductState {
    pub fn new(factors: Vec<Vec<C64>>) -> Result<Self> {
        for f in &factors {
            let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidProblem(format!(
                    "product factor has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Vec<C64>] {
        &self.factors
    }

    pub fn a(&self) -> &[C64] {
        &self.factors[0]
    }

    pub fn b(&self) -> &[C64] {
        &self.factors[1]
    }

    pub fn vector(&self) -> Vec<C64> {
        self.factors
            .iter()
            .skip(1)
            .fold(self.factors[0].clone(), |acc, f| {
                crate::hermitian::kron_vec(&acc, f)
            })
    }
}

#[derive(Clone, Debug)]
pub struct SeesawOutcome {
    /// Smallest `<ψ|W|ψ>` found over product vectors; an upper bound on the
    /// true minimum.
    pub value: f64,
    pub state: ProductState,
    /// Value after each sweep of the best restart.
    pub trajectory: Vec<f64>,
}

/// Normalised eigenvector of the smallest eigenvalue, rephased so that its
/// largest component is real and positive.
pub(crate) fn min_eigvec(m: ComplexMatrix) -> (f64, Vec<C64>) {
    let h = HermitianOperator::from_data(m, f64::INFINITY).expect("square");
    let (val, mut v) = h.min_eigenpair();
    let pivot = v
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm().max(f64::MIN_POSITIVE);
    for z in v.iter_mut() {
        *z *= phase;
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (val, v.into_iter().map(|z| z / norm).collect())
}

/// Sweep cap when convergence stalls above `SEESAW_TOL`.
pub const SEESAW_TOL: f64 = 1e-12;

/// Alternating minimisation of `<ψ⊗φ|W|ψ⊗φ>`: fix `φ` and take `ψ` as the
/// lowest eigenvector of `<φ|W|φ>`, then swap roles, until a sweep improves
/// by less than [`SEESAW_TOL`] or `iters` sweeps elapse.
pub fn seesaw_min_product(
    w: &HermitianOperator,
    d_a: usize,
    d_b: usize,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<SeesawOutcome> {
    if w.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {} is not {d_a}·{d_b}",
            w.dim()
        )));
    }
    let blocks: Vec<Vec<ComplexMatrix>> = (0..d_a)
        .map(|i| (0..d_a).map(|j| block(w, i, j, d_a, d_b)).collect())
        .collect::<Result<_>>()?;
    let mut best: Option<SeesawOutcome> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng_for(seed, r as u64);
        let mut a = random_unit_vector(&mut rng, d_a);
        let mut b = random_unit_vector(&mut rng, d_b);
        let mut trajectory = Vec::new();
        let mut value = f64::INFINITY;
        for _ in 0..iters.max(1) {
            // M_A[i, j] = <b|W_ij|b>
            let m_a = ComplexMatrix::from_fn(d_a, d_a, |i, j| {
                let wb = blocks[i][j].apply(&b);
                b.iter().zip(&wb).map(|(x, y)| x.conj() * y).sum()
            });
            a = min_eigvec(m_a).1;
            let m_b = evaluate_robust_constraint(w, d_a, d_b, &a)?;
            let (v, nb) = min_eigvec(m_b.into_matrix());
            b = nb;
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
                state: ProductState::new(vec![a, b])?,
                trajectory,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptResult {
    pub is_ppt: bool,
    pub min_pt_eigenvalue: f64,
}

/// Peres–Horodecki test on the second subsystem.
pub fn ppt_check(rho: &DensityOperator) -> Result<PptResult> {
    rho.bipartite_dims()?;
    let min = partial_transpose(rho, 1)?.min_eigenvalue();
    Ok(PptResult {
        is_ppt: min >= -PPT_TOL,
        min_pt_eigenvalue: min,
    })
}

/// Random fully separable state `Σ_i p_i ⊗_k |ψ_ik><ψ_ik|` with Haar-random
/// factors and flat-Dirichlet weights.
pub fn sample_separable(
    dims: &[usize],
    mixture_size: usize,
    seed: u64,
) -> Result<DensityOperator> {
    if mixture_size == 0 {
        return Err(Error::InvalidProblem("mixture size must be at least 1".into()));
    }
    let mut rng = rng_for(seed, 0);
    let weights = random_simplex(&mut rng, mixture_size);
    let total: usize = dims.iter().product();
    let mut acc = ComplexMatrix::zeros(total, total);
    for p in weights {
        let factors = dims
            .iter()
            .map(|&d| random_unit_vector(&mut rng, d))
            .collect();
        let v = ProductState::new(factors)?.vector();
        acc = &acc + &ComplexMatrix::outer(&v, &v).scale_real(p);
    }
    DensityOperator::new(dims.to_vec(), HermitianOperator::from_data(acc, 1e-9)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn block_counts() {
        let bell = fixtures::bell_state();
        let p = build_theorem2(&bell).unwrap();
        assert_eq!(p.blocks().len(), 10);
        assert!(p.blocks().iter().all(|b| b.dim() == 2));
        assert_eq!(p.num_vars(), 16);
        assert_eq!(p.equalities().len(), 1);

        let rho = sample_separable(&[3, 2], 3, 1).unwrap();
        let p = build_theorem2(&rho).unwrap();
        assert_eq!(p.blocks().len(), 27);
        assert_eq!(pairwise_block_count(3), 27);
    }

    #[test]
    fn objective_pairs_with_state() {
        let rho = sample_separable(&[2, 3], 4, 2).unwrap();
        let p = build_theorem2(&rho).unwrap();
        let var = witness_variable(6);
        let x: Vec<f64> = (0..36).map(|k| ((k * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let w = var.assemble(&x);
        let direct = trace_product(&w, rho.op()).unwrap();
        let lin: f64 = p.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
        assert!((direct - lin).abs() < 1e-12);
    }

    #[test]
    fn non_bipartite_rejected() {
        let rho = sample_separable(&[2, 2, 2], 1, 0).unwrap();
        assert!(matches!(build_theorem2(&rho), Err(Error::NotBipartite(3))));
    }

    #[test]
    fn robust_constraint_examples() {
        let w = fixtures::bell_oew();
        let e0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let got = evaluate_robust_constraint(&w, 2, 2, &e0).unwrap();
        assert_eq!(got.matrix(), &block(&w, 0, 0, 2, 2).unwrap());

        let flat = HermitianOperator::identity(6).scale(1.0 / 6.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = [C64::new(s, 0.0), C64::new(0.0, 0.5), C64::new(0.5, 0.0)];
        let got = evaluate_robust_constraint(&flat, 3, 2, &a).unwrap();
        let want = HermitianOperator::identity(2).scale(1.0 / 6.0);
        assert!(got.matrix().max_abs_diff(want.matrix()) < 1e-15);

        assert!(evaluate_robust_constraint(&flat, 2, 3, &a).is_err());
    }

    #[test]
    fn seesaw_constant_form() {
        let w = HermitianOperator::identity(4).scale(0.25);
        let out = seesaw_min_product(&w, 2, 2, 3, 50, 0).unwrap();
        assert!((out.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn seesaw_on_bell_oew_reaches_zero() {
        let out = seesaw_min_product(&fixtures::bell_oew(), 2, 2, 10, 500, 4).unwrap();
        assert!(out.value.abs() < 1e-9, "{}", out.value);
        assert!(out.trajectory.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn ppt_examples() {
        let r = ppt_check(&fixtures::bell_state()).unwrap();
        assert!(!r.is_ppt);
        assert!((r.min_pt_eigenvalue + 0.5).abs() < 1e-12);
        assert!(!ppt_check(&fixtures::rho_ab()).unwrap().is_ppt);
        assert!(ppt_check(&fixtures::sigma_ab()).unwrap().is_ppt);
    }

    #[test]
    fn separable_samples_are_valid_states() {
        let pure = sample_separable(&[2, 3], 1, 17).unwrap();
        let ev = pure.op().eigenvalues();
        assert!(ev[..5].iter().all(|v| v.abs() < 1e-12));
        assert!((ev[5] - 1.0).abs() < 1e-12);
        for seed in 0..20 {
            let s = sample_separable(&[3, 2], 5, seed).unwrap();
            assert!(ppt_check(&s).unwrap().is_ppt);
        }
        assert!(sample_separable(&[2, 2], 0, 0).is_err());
    }

    #[test]
    fn witness_trace_enforced() {
        let rho = fixtures::bell_state();
        let w = HermitianOperator::identity(4).scale(0.2);
        assert!(matches!(
            Witness::for_state(w, &rho),
            Err(Error::InvalidWitness(_))
        ));
    }

    #[test]
    fn product_state_validation() {
        let bad = vec![vec![C64::new(2.0, 0.0)]];
        assert!(ProductState::new(bad).is_err());
    }
}
