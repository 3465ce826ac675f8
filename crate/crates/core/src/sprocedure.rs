//! Full-block S-procedure relaxation of the witness constraint.
//!
//! With `F(Δ) = BΔ(I - DΔ)⁻¹C` the LFR of `Σ a_i* a_j W_ij`, any multiplier
//! `P = [[Q, S], [S†, R]]` satisfying `[Δ; I]† P [Δ; I] ⪰ 0` on the
//! uncertainty set turns the robust constraint `F(Δ) ⪰ 0` into the single LMI
//!
//! ```text
//! T† Diag([[0, X], [X, 0]], P) T ⪯ 0,   T = [[I, 0], [A, B], [0, I], [C, D]]
//! ```
//!
//! with `A = 0` and `X = -I`. `B` is linear in `W` while `C`, `D`, `P` are
//! fixed, so the LMI is linear in `W`.

use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, DensityOperator, HermitianOperator, C64};
use crate::lfr::{build_delta, witness_lfr, witness_structure, DeltaStructure};
use crate::random::{random_unit_vector, rng_for};
use crate::sdp::{self, LmiBlock, SdpProblem, SolveStatus};
use crate::witness::{
    verdict_from_solution, witness_problem, witness_variable, DetectSettings, Verdict,
    VerdictKind,
};

/// Multiplier condition slack used by [`check_multiplier`].
pub const MULTIPLIER_TOL: f64 = 1e-9;
pub const DEFAULT_MULTIPLIER_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier {
    q: HermitianOperator,
    s: ComplexMatrix,
    r: HermitianOperator,
}

impl Multiplier {
    pub fn new(q: HermitianOperator, s: ComplexMatrix, r: HermitianOperator) -> Result<Self> {
        if s.shape() != (q.dim(), r.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "S is {}x{}, expected {}x{}",
                s.rows(),
                s.cols(),
                q.dim(),
                r.dim()
            )));
        }
        Ok(Self { q, s, r })
    }

    /// Splits a Hermitian `2N × 2N` matrix into `[[Q, S], [S†, R]]`.
    pub fn from_matrix(p: &HermitianOperator) -> Result<Self> {
        if !p.dim().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "multiplier dimension {} is odd",
                p.dim()
            )));
        }
        let n = p.dim() / 2;
        let m = p.matrix();
        let herm = |x: ComplexMatrix| HermitianOperator::from_data(x, f64::INFINITY);
        Self::new(
            herm(m.submatrix(0, 0, n, n))?,
            m.submatrix(0, n, n, n),
            herm(m.submatrix(n, n, n, n))?,
        )
    }

    pub fn q(&self) -> &HermitianOperator {
        &self.q
    }

    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn r(&self) -> &HermitianOperator {
        &self.r
    }

    /// Size `N` of the uncertainty block the multiplier acts on.
    pub fn size(&self) -> usize {
        self.q.dim()
    }

    pub fn matrix(&self) -> HermitianOperator {
        let n = self.size();
        let mut p = ComplexMatrix::zeros(2 * n, 2 * n);
        p.set_submatrix(0, 0, self.q.matrix());
        p.set_submatrix(0, n, &self.s);
        p.set_submatrix(n, 0, &self.s.adjoint());
        p.set_submatrix(n, n, self.r.matrix());
        HermitianOperator::new(p).expect("Hermitian by construction")
    }

    /// `Q = -I`, `S = 0`, `R = I`.
    pub fn is_simple(&self) -> bool {
        let n = self.size();
        self.q == HermitianOperator::identity(n).scale(-1.0)
            && self.s.max_abs() == 0.0
            && self.r == HermitianOperator::identity(n)
    }

    /// `[Δ; I]† P [Δ; I] = Δ†QΔ + Δ†S + S†Δ + R`.
    pub fn quadratic_form(&self, delta: &ComplexMatrix) -> Result<HermitianOperator> {
        if delta.shape() != (self.size(), self.size()) {
            return Err(Error::DimensionMismatch(format!(
                "Δ is {}x{}, multiplier acts on {}",
                delta.rows(),
                delta.cols(),
                self.size()
            )));
        }
        let dt = delta.adjoint();
        let qd = &(&dt * self.q.matrix()) * delta;
        let cross = &dt * &self.s;
        let sum = &(&(&qd + &cross) + &cross.adjoint()) + self.r.matrix();
        HermitianOperator::from_data(sum, 1e-9)
    }
}

/// `P = [[-I, 0], [0, I]]`, valid whenever `Δ†Δ ⪯ I`.
pub fn simple_multiplier(n: usize) -> Multiplier {
    Multiplier {
        q: HermitianOperator::identity(n).scale(-1.0),
        s: ComplexMatrix::zeros(n, n),
        r: HermitianOperator::identity(n),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierCheck {
    pub ok: bool,
    /// Most negative eigenvalue of the quadratic form over the samples.
    pub worst: f64,
}

/// Samples the multiplier condition on unit-norm coefficient vectors: the
/// coordinate vectors first, then Haar-random ones up to `samples` in total.
pub fn check_multiplier(
    p: &Multiplier,
    structure: &DeltaStructure,
    samples: usize,
    seed: u64,
) -> Result<MultiplierCheck> {
    if structure.size() != p.size() {
        return Err(Error::DimensionMismatch(format!(
            "multiplier acts on {}, Δ structure has size {}",
            p.size(),
            structure.size()
        )));
    }
    let k = structure.num_params();
    let mut rng = rng_for(seed, 0);
    let mut worst = f64::INFINITY;
    for idx in 0..samples.max(1) {
        let a = if idx < k {
            let mut e = vec![C64::new(0.0, 0.0); k];
            e[idx] = C64::new(1.0, 0.0);
            e
        } else {
            random_unit_vector(&mut rng, k)
        };
        let form = p.quadratic_form(&build_delta(structure, &a)?)?;
        worst = worst.min(form.min_eigenvalue());
    }
    Ok(MultiplierCheck {
        ok: worst >= -MULTIPLIER_TOL,
        worst,
    })
}

/// Accepts the simple multiplier by its identity `I - Δ†Δ ⪰ 0` (every
/// diagonal entry of `Δ` has modulus at most 1 for unit `a`); any other
/// multiplier goes through [`check_multiplier`].
pub fn validate_multiplier(
    p: &Multiplier,
    structure: &DeltaStructure,
    samples: usize,
    seed: u64,
) -> Result<MultiplierCheck> {
    if p.is_simple() && p.size() == structure.size() {
        return Ok(MultiplierCheck {
            ok: true,
            worst: 0.0,
        });
    }
    check_multiplier(p, structure, samples, seed)
}

/// The LMI matrix `-(T† Diag([[0, X], [X, 0]], P) T)` at `A = 0`, `X = -I`,
/// formed by explicit multiplication.
pub fn sprocedure_lmi_direct(
    w: &HermitianOperator,
    p: &Multiplier,
    d_a: usize,
    d_b: usize,
) -> Result<HermitianOperator> {
    let f = witness_lfr(w, d_a, d_b)?;
    let n = f.structure().size();
    if p.size() != n {
        return Err(Error::DimensionMismatch(format!(
            "multiplier acts on {}, witness LFR needs {n}",
            p.size()
        )));
    }
    let id_b = ComplexMatrix::identity(d_b);
    let id_n = ComplexMatrix::identity(n);
    let zero_bn = ComplexMatrix::zeros(d_b, n);
    let zero_nb = ComplexMatrix::zeros(n, d_b);
    let t = ComplexMatrix::vstack(&[
        &ComplexMatrix::hstack(&[&id_b, &zero_bn]),
        &ComplexMatrix::hstack(&[f.a(), f.b()]),
        &ComplexMatrix::hstack(&[&zero_nb, &id_n]),
        &ComplexMatrix::hstack(&[f.c(), f.d()]),
    ]);
    let x = id_b.scale_real(-1.0);
    let zero_b = ComplexMatrix::zeros(d_b, d_b);
    let outer = ComplexMatrix::vstack(&[
        &ComplexMatrix::hstack(&[&zero_b, &x]),
        &ComplexMatrix::hstack(&[&x, &zero_b]),
    ]);
    let middle = ComplexMatrix::block_diag(&[&outer, p.matrix().matrix()]);
    let form = &(&t.adjoint() * &middle) * &t;
    HermitianOperator::from_data(form.scale_real(-1.0), 1e-9)
}

/// Block formulas for the same LMI: constant part
/// `-[[C†RC, C†(S† + RD)], [(S + D†R)C, Q + SD + D†S† + D†RD]]` and the
/// `W`-linear part `[[0, B], [B†, 0]]`.
fn sprocedure_block(p: &Multiplier, d_a: usize, d_b: usize) -> Result<LmiBlock> {
    let base = witness_lfr(&HermitianOperator::zeros(d_a * d_b), d_a, d_b)?;
    let n = base.structure().size();
    if p.size() != n {
        return Err(Error::DimensionMismatch(format!(
            "multiplier acts on {}, witness LFR needs {n}",
            p.size()
        )));
    }
    let (c, d) = (base.c(), base.d());
    let (q, s, r) = (p.q.matrix(), &p.s, p.r.matrix());
    let ct = c.adjoint();
    let dt = d.adjoint();
    let s_t = s.adjoint();
    let top_left = &(&ct * r) * c;
    let top_right = &ct * &(&s_t + &(r * d));
    let bottom_right = &(&(q + &(s * d)) + &(&dt * &s_t)) + &(&(&dt * r) * d);

    let dim = d_b + n;
    let mut constant = ComplexMatrix::zeros(dim, dim);
    constant.set_submatrix(0, 0, &top_left);
    constant.set_submatrix(0, d_b, &top_right);
    constant.set_submatrix(d_b, 0, &top_right.adjoint());
    constant.set_submatrix(d_b, d_b, &bottom_right);
    let constant = HermitianOperator::from_data(constant.scale_real(-1.0), 1e-9)?;

    let coefficients = witness_variable(d_a * d_b)
        .basis()
        .iter()
        .map(|e| {
            let b = witness_lfr(e, d_a, d_b)?.b().clone();
            let mut m = ComplexMatrix::zeros(dim, dim);
            m.set_submatrix(0, d_b, &b);
            m.set_submatrix(d_b, 0, &b.adjoint());
            HermitianOperator::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    LmiBlock::new(constant, coefficients)
}

/// Witness SDP: minimise `Tr(Wρ)` subject to `Tr W = 1` and the S-procedure
/// LMI for multiplier `p`.
pub fn build_sprocedure_sdp(rho: &DensityOperator, p: &Multiplier) -> Result<SdpProblem> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    let block = sprocedure_block(p, d_a, d_b)?;
    witness_problem(rho, &witness_variable(d_a * d_b).basis(), vec![block])
}

pub const SPROCEDURE_METHOD: &str = "sprocedure";
pub const SPROCEDURE_INFEASIBLE_METHOD: &str = "sprocedure-infeasible";

/// Refuses multipliers that fail validation; an infeasible relaxation is an
/// inconclusive verdict with infinite value, any other solver failure an
/// error.
pub fn detect_with_sprocedure(
    rho: &DensityOperator,
    p: &Multiplier,
    settings: &DetectSettings,
    samples: usize,
    seed: u64,
) -> Result<Verdict> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    let check = validate_multiplier(p, &witness_structure(d_a, d_b), samples, seed)?;
    if !check.ok {
        return Err(Error::InvalidMultiplier { worst: check.worst });
    }
    let problem = build_sprocedure_sdp(rho, p)?;
    let sol = sdp::solve(&problem, &settings.solver)?;
    match sol.status {
        SolveStatus::Optimal => verdict_from_solution(rho, &sol, settings, SPROCEDURE_METHOD),
        SolveStatus::Infeasible => Ok(Verdict {
            kind: VerdictKind::Inconclusive,
            value: f64::INFINITY,
            witness: None,
            method: SPROCEDURE_INFEASIBLE_METHOD.to_string(),
            certificates: Some((&sol).into()),
        }),
        status => Err(Error::Solver { status }),
    }
}
