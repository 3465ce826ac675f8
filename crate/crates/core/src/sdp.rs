//! Standard-form semidefinite programs:
//!
//! ```text
//! minimize    c·x
//! subject to  F_b(x) = F_b0 + Σ_i x_i F_bi ⪰ 0   for every block b
//!             a_k·x = b_k
//! ```
//!
//! Blocks are complex Hermitian; the solver works on their real symmetric
//! embeddings `[[Re H, -Im H], [Im H, Re H]]`. Equalities are eliminated up
//! front (`x = x_p + N z`), leaving a pure LMI problem in `z` that is solved
//! with an infeasible-start primal-dual path-following method (HKM direction,
//! Mehrotra predictor-corrector).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, HermitianOperator, C64};

/// One LMI block `F_0 + Σ x_i F_i ⪰ 0`.
#[derive(Clone, Debug)]
pub struct LmiBlock {
    constant: HermitianOperator,
    coefficients: Vec<HermitianOperator>,
}

impl LmiBlock {
    pub fn new(constant: HermitianOperator, coefficients: Vec<HermitianOperator>) -> Result<Self> {
        let n = constant.dim();
        if let Some(bad) = coefficients.iter().find(|f| f.dim() != n) {
            return Err(Error::DimensionMismatch(format!(
                "LMI coefficient of dimension {} in a block of dimension {n}",
                bad.dim()
            )));
        }
        Ok(Self {
            constant,
            coefficients,
        })
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn constant(&self) -> &HermitianOperator {
        &self.constant
    }

    pub fn coefficients(&self) -> &[HermitianOperator] {
        &self.coefficients
    }

    /// `F_0 + Σ x_i F_i`.
    pub fn evaluate(&self, x: &[f64]) -> HermitianOperator {
        let mut acc = self.constant.matrix().clone();
        for (f, &xi) in self.coefficients.iter().zip(x) {
            if xi != 0.0 {
                acc = &acc + &f.matrix().scale_real(xi);
            }
        }
        HermitianOperator::from_data(acc, f64::INFINITY).expect("square by construction")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearEquality {
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    blocks: Vec<LmiBlock>,
    equalities: Vec<LinearEquality>,
}

impl SdpProblem {
    pub fn new(
        objective: Vec<f64>,
        blocks: Vec<LmiBlock>,
        equalities: Vec<LinearEquality>,
    ) -> Result<Self> {
        let m = objective.len();
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.coefficients.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "block {k} has {} coefficient matrices for {m} variables",
                    b.coefficients.len()
                )));
            }
        }
        for (k, e) in equalities.iter().enumerate() {
            if e.coefficients.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "equality {k} has {} coefficients for {m} variables",
                    e.coefficients.len()
                )));
            }
            if !e.rhs.is_finite() || e.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            num_vars: m,
            objective,
            blocks,
            equalities,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    pub fn equalities(&self) -> &[LinearEquality] {
        &self.equalities
    }
}

/// Coordinates for a Hermitian matrix variable of dimension `dim`, occupying
/// `dim²` consecutive problem variables starting at `offset`: the diagonal,
/// then for each upper-triangle entry `(r, c)` its real part followed by its
/// imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianVariable {
    pub dim: usize,
    pub offset: usize,
}

impl HermitianVariable {
    pub fn new(dim: usize, offset: usize) -> Self {
        Self { dim, offset }
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// The basis matrices `E_k` with `W = Σ x_k E_k`.
    pub fn basis(&self) -> Vec<HermitianOperator> {
        (0..self.len())
            .map(|k| {
                let mut x = vec![0.0; self.len()];
                x[k] = 1.0;
                self.assemble_local(&x)
            })
            .collect()
    }

    fn assemble_local(&self, x: &[f64]) -> HermitianOperator {
        let d = self.dim;
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = C64::new(x[i], 0.0);
        }
        let mut k = d;
        for r in 0..d {
            for c in r + 1..d {
                let z = C64::new(x[k], x[k + 1]);
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
                k += 2;
            }
        }
        HermitianOperator::new(m).expect("Hermitian by construction")
    }

    /// Reads the variable out of a full problem vector.
    pub fn assemble(&self, x: &[f64]) -> HermitianOperator {
        self.assemble_local(&x[self.offset..self.offset + self.len()])
    }

    /// Inverse of [`assemble`](Self::assemble).
    pub fn coordinates(&self, h: &HermitianOperator) -> Vec<f64> {
        let d = self.dim;
        let m = h.matrix();
        let mut out = Vec::with_capacity(self.len());
        out.extend((0..d).map(|i| m[(i, i)].re));
        for r in 0..d {
            for c in r + 1..d {
                out.push(m[(r, c)].re);
                out.push(m[(r, c)].im);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iterations: usize,
    /// Centering parameter used for the very first Newton step; later steps
    /// choose it adaptively.
    pub initial_centering: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iterations: 200,
            initial_centering: 0.5,
            step_fraction: 0.98,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gap_tol > 0.0
            && self.feas_tol > 0.0
            && self.max_iterations > 0
            && (0.0..=1.0).contains(&self.initial_centering)
            && self.step_fraction > 0.0
            && self.step_fraction < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidProblem(format!("invalid solver settings {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub mu: f64,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub primal_step: f64,
    pub dual_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Complementarity `<S, Z>` between the LMI slack and the dual matrix.
    pub duality_gap: f64,
    /// Most negative eigenvalue over all blocks of `F(x)`.
    pub primal_residual: f64,
    /// Largest `|a·x - b|` over the equalities.
    pub equality_residual: f64,
    pub iterations: usize,
    pub log: Vec<IterationLog>,
}

/// Independent re-check of a candidate point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub block_min_eigenvalues: Vec<f64>,
    pub equality_residuals: Vec<f64>,
    pub primal_residual: f64,
    pub equality_residual: f64,
    pub objective: f64,
}

pub fn check_solution(p: &SdpProblem, x: &[f64]) -> Result<Certificate> {
    if x.len() != p.num_vars {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, problem has {} variables",
            x.len(),
            p.num_vars
        )));
    }
    let block_min_eigenvalues: Vec<f64> =
        p.blocks.iter().map(|b| b.evaluate(x).min_eigenvalue()).collect();
    let equality_residuals: Vec<f64> = p
        .equalities
        .iter()
        .map(|e| (dot(&e.coefficients, x) - e.rhs).abs())
        .collect();
    Ok(Certificate {
        primal_residual: if block_min_eigenvalues.is_empty() {
            0.0
        } else {
            block_min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        },
        equality_residual: equality_residuals.iter().copied().fold(0.0, f64::max),
        objective: dot(&p.objective, x),
        block_min_eigenvalues,
        equality_residuals,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `[[Re H, -Im H], [Im H, Re H]]`.
pub fn real_embedding(h: &HermitianOperator) -> DMatrix<f64> {
    let n = h.dim();
    let m = h.matrix();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// `x = particular + basis · z` parameterises `{x : A x = b}`.
struct AffineParam {
    particular: Vec<f64>,
    /// Columns of the nullspace basis, each stored sparsely.
    basis: Vec<Vec<(usize, f64)>>,
}

impl AffineParam {
    fn expand(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.particular.clone();
        for (col, &zj) in self.basis.iter().zip(z) {
            for &(i, v) in col {
                x[i] += v * zj;
            }
        }
        x
    }
}

/// Gauss-Jordan elimination with partial pivoting; free columns become the
/// nullspace basis, which stays sparse when the equalities are.
fn eliminate_equalities(m: usize, eqs: &[LinearEquality]) -> Result<AffineParam> {
    let rows = eqs.len();
    let mut a: Vec<Vec<f64>> = eqs.iter().map(|e| e.coefficients.clone()).collect();
    let mut b: Vec<f64> = eqs.iter().map(|e| e.rhs).collect();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |s, v| s.max(v.abs()))
        .max(1.0);
    let tol = 1e-12 * scale;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..m {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|k| (k, a[k][col].abs()))
            .fold((r, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if val <= tol {
            continue;
        }
        a.swap(r, best);
        b.swap(r, best);
        let p = a[r][col];
        for v in a[r].iter_mut() {
            *v /= p;
        }
        b[r] /= p;
        for k in 0..rows {
            if k != r && a[k][col] != 0.0 {
                let f = a[k][col];
                for c in 0..m {
                    a[k][c] -= f * a[r][c];
                }
                b[k] -= f * b[r];
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    for k in r..rows {
        if b[k].abs() > 1e-9 * (1.0 + scale) {
            return Err(Error::InvalidProblem("inconsistent equality constraints".into()));
        }
    }
    let mut particular = vec![0.0; m];
    let mut is_pivot = vec![false; m];
    for &(row, col) in &pivots {
        particular[col] = b[row];
        is_pivot[col] = true;
    }
    let basis = (0..m)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut col = vec![(f, 1.0)];
            for &(row, pc) in &pivots {
                let v = a[row][f];
                if v.abs() > 0.0 {
                    col.push((pc, -v));
                }
            }
            col
        })
        .collect();
    Ok(AffineParam { particular, basis })
}

/// A block after embedding and equality elimination.
struct RealBlock {
    constant: DMatrix<f64>,
    /// `(reduced variable index, coefficient)` for the nonzero coefficients.
    terms: Vec<(usize, DMatrix<f64>)>,
}

struct Reduced {
    param: AffineParam,
    cost: DVector<f64>,
    blocks: Vec<RealBlock>,
}

fn reduce(p: &SdpProblem) -> Result<Reduced> {
    let param = eliminate_equalities(p.num_vars, &p.equalities)?;
    let mr = param.basis.len();
    let cost = DVector::from_iterator(
        mr,
        param
            .basis
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v * p.objective[i]).sum()),
    );
    let blocks = p
        .blocks
        .iter()
        .map(|blk| {
            let embedded: Vec<Option<DMatrix<f64>>> = blk
                .coefficients
                .iter()
                .map(|f| (f.matrix().max_abs() > 0.0).then(|| real_embedding(f)))
                .collect();
            let mut constant = real_embedding(&blk.constant);
            for (i, xi) in param.particular.iter().enumerate() {
                if let (Some(f), true) = (&embedded[i], *xi != 0.0) {
                    constant += f * *xi;
                }
            }
            let terms = param
                .basis
                .iter()
                .enumerate()
                .filter_map(|(j, col)| {
                    let mut acc: Option<DMatrix<f64>> = None;
                    for &(i, v) in col {
                        if let Some(f) = &embedded[i] {
                            match acc.as_mut() {
                                Some(a) => *a += f * v,
                                None => acc = Some(f * v),
                            }
                        }
                    }
                    acc.filter(|a| a.amax() > 0.0).map(|a| (j, a))
                })
                .collect();
            RealBlock { constant, terms }
        })
        .collect();
    Ok(Reduced {
        param,
        cost,
        blocks,
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in r + 1..n {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite if `dX ⪰ 0`). `None` if `X` is
/// not numerically positive definite.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let chol = x.clone().cholesky()?;
    let l = chol.l();
    let half = l.solve_lower_triangular(dx)?;
    let mut y = l.solve_lower_triangular(&half.transpose())?;
    symmetrize(&mut y);
    let min = y.symmetric_eigenvalues().min();
    Some(if min >= 0.0 { f64::INFINITY } else { -1.0 / min })
}

fn spd_inverse(x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut inv = x.clone().cholesky()?.inverse();
    symmetrize(&mut inv);
    Some(inv)
}

struct Direction {
    dz: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dzm: Vec<DMatrix<f64>>,
}

struct Iterate<'a> {
    red: &'a Reduced,
    z: DVector<f64>,
    s: Vec<DMatrix<f64>>,
    zm: Vec<DMatrix<f64>>,
}

impl Iterate<'_> {
    fn lmi_residuals(&self) -> Vec<DMatrix<f64>> {
        self.red
            .blocks
            .iter()
            .zip(&self.s)
            .map(|(b, s)| {
                let mut r = &b.constant - s;
                for (j, g) in &b.terms {
                    r += g * self.z[*j];
                }
                r
            })
            .collect()
    }

    fn dual_residual(&self) -> DVector<f64> {
        let mut r = self.red.cost.clone();
        for (b, zm) in self.red.blocks.iter().zip(&self.zm) {
            for (j, g) in &b.terms {
                r[*j] -= g.dot(zm);
            }
        }
        r
    }

    fn gap(&self) -> f64 {
        self.s.iter().zip(&self.zm).map(|(s, z)| s.dot(z)).sum()
    }

    fn schur(&self, s_inv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mr = self.z.len();
        let mut m = DMatrix::zeros(mr, mr);
        for ((b, si), zm) in self.red.blocks.iter().zip(s_inv).zip(&self.zm) {
            for (j, gj) in &b.terms {
                let p = si * gj * zm;
                for (i, gi) in &b.terms {
                    m[(*i, *j)] += gi.dot(&p);
                }
            }
        }
        let t = m.transpose();
        (m + t) * 0.5
    }

    /// Newton direction for centring target `σμ` and optional second-order
    /// correction `K_b = dS_b dZ_b` from a predictor step.
    fn direction(
        &self,
        chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
        s_inv: &[DMatrix<f64>],
        rp: &[DMatrix<f64>],
        rd: &DVector<f64>,
        sigma_mu: f64,
        correction: Option<&[DMatrix<f64>]>,
    ) -> Direction {
        let h: Vec<DMatrix<f64>> = s_inv
            .iter()
            .zip(&self.zm)
            .enumerate()
            .map(|(k, (si, zm))| {
                let mut h = si * sigma_mu - zm;
                if let Some(corr) = correction {
                    h -= si * &corr[k];
                }
                h
            })
            .collect();
        let mut rhs = -rd.clone();
        for (k, b) in self.red.blocks.iter().enumerate() {
            let t = &h[k] - &s_inv[k] * &rp[k] * &self.zm[k];
            for (j, g) in &b.terms {
                rhs[*j] += g.dot(&t);
            }
        }
        let dz = chol.solve(&rhs);
        let mut ds = Vec::with_capacity(h.len());
        let mut dzm = Vec::with_capacity(h.len());
        for (k, b) in self.red.blocks.iter().enumerate() {
            let mut d = rp[k].clone();
            for (j, g) in &b.terms {
                d += g * dz[*j];
            }
            let mut dzk = &h[k] - &s_inv[k] * &d * &self.zm[k];
            symmetrize(&mut dzk);
            ds.push(d);
            dzm.push(dzk);
        }
        Direction { dz, ds, dzm }
    }

    fn step_lengths(&self, d: &Direction) -> Option<(f64, f64)> {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for k in 0..self.s.len() {
            ap = ap.min(max_step(&self.s[k], &d.ds[k])?);
            ad = ad.min(max_step(&self.zm[k], &d.dzm[k])?);
        }
        Some((ap, ad))
    }
}

fn regularized_cholesky(m: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = m.clone().cholesky() {
        return Some(c);
    }
    let scale = m.diagonal().amax().max(1.0);
    for delta in [1e-14, 1e-12, 1e-10, 1e-8] {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += delta * scale;
        }
        if let Some(c) = r.cholesky() {
            return Some(c);
        }
    }
    None
}

/// Iterations the LMI residual may stall above tolerance before the problem
/// is declared infeasible.
const STALL_WINDOW: usize = 30;

pub fn solve(p: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    settings.validate()?;
    let red = reduce(p)?;
    let mr = red.cost.len();

    let total_dim: usize = red.blocks.iter().map(|b| b.constant.nrows()).sum();
    let mut log = Vec::new();

    let finish = |status: SolveStatus, z: &DVector<f64>, gap: f64, log: Vec<IterationLog>| {
        let x = red.param.expand(z.as_slice());
        let cert = check_solution(p, &x)?;
        Ok(SdpSolution {
            status,
            objective: cert.objective,
            duality_gap: gap,
            primal_residual: cert.primal_residual,
            equality_residual: cert.equality_residual,
            iterations: log.len(),
            x,
            log,
        })
    };

    if total_dim == 0 {
        // No conic constraints: bounded only if the reduced cost vanishes.
        let status = if red.cost.amax() <= settings.feas_tol {
            SolveStatus::Optimal
        } else {
            SolveStatus::NumericalFailure
        };
        return finish(status, &DVector::zeros(mr), 0.0, log);
    }

    let max_g = red
        .blocks
        .iter()
        .flat_map(|b| b.terms.iter().map(|(_, g)| g.norm()))
        .fold(0.0_f64, f64::max);
    let g0_norm = red.blocks.iter().map(|b| b.constant.norm_squared()).sum::<f64>().sqrt();
    let n = total_dim as f64;
    let xi_s = 10.0_f64.max(n.sqrt()).max(g0_norm).max(max_g);
    let xi_z = 10.0_f64
        .max(n.sqrt())
        .max(n * (1.0 + red.cost.amax()) / (1.0 + max_g));

    let mut it = Iterate {
        red: &red,
        z: DVector::zeros(mr),
        s: red
            .blocks
            .iter()
            .map(|b| DMatrix::identity(b.constant.nrows(), b.constant.nrows()) * xi_s)
            .collect(),
        zm: red
            .blocks
            .iter()
            .map(|b| DMatrix::identity(b.constant.nrows(), b.constant.nrows()) * xi_z)
            .collect(),
    };

    let cost_norm = red.cost.norm();
    let mut pinf_history: Vec<f64> = Vec::new();
    let mut last_gap = it.gap();

    for iter in 0..settings.max_iterations {
        let rp = it.lmi_residuals();
        let rd = it.dual_residual();
        let gap = it.gap();
        last_gap = gap;
        let mu = gap / n;
        let pinf = rp.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + g0_norm);
        let dinf = rd.norm() / (1.0 + cost_norm);
        pinf_history.push(pinf);

        if gap <= settings.gap_tol && pinf <= settings.feas_tol && dinf <= settings.feas_tol {
            let x = red.param.expand(it.z.as_slice());
            let cert = check_solution(p, &x)?;
            if cert.primal_residual >= -settings.feas_tol
                && cert.equality_residual <= settings.feas_tol
            {
                return finish(SolveStatus::Optimal, &it.z, gap, log);
            }
        }

        // Farkas ray: Z ⪰ 0 with <G0, Z> < 0 and <G_j, Z> ≈ 0 certifies that
        // no z makes the LMI feasible.
        let g0_dot_z: f64 = red
            .blocks
            .iter()
            .zip(&it.zm)
            .map(|(b, z)| b.constant.dot(z))
            .sum();
        if g0_dot_z < 0.0 {
            let az = &red.cost - &rd;
            if az.amax() <= settings.feas_tol * (-g0_dot_z) && pinf > settings.feas_tol {
                return finish(SolveStatus::Infeasible, &it.z, gap, log);
            }
        }
        if iter >= STALL_WINDOW
            && pinf > settings.feas_tol
            && pinf >= 0.5 * pinf_history[iter - STALL_WINDOW]
            && gap > settings.gap_tol
        {
            return finish(SolveStatus::Infeasible, &it.z, gap, log);
        }

        let Some(s_inv) = it.s.iter().map(spd_inverse).collect::<Option<Vec<_>>>() else {
            return finish(SolveStatus::NumericalFailure, &it.z, gap, log);
        };
        let schur = it.schur(&s_inv);
        let Some(chol) = regularized_cholesky(&schur) else {
            return finish(SolveStatus::NumericalFailure, &it.z, gap, log);
        };

        let sigma_mu;
        let correction: Option<Vec<DMatrix<f64>>>;
        if iter == 0 {
            sigma_mu = settings.initial_centering * mu;
            correction = None;
        } else {
            let pred = it.direction(&chol, &s_inv, &rp, &rd, 0.0, None);
            let Some((ap, ad)) = it.step_lengths(&pred) else {
                return finish(SolveStatus::NumericalFailure, &it.z, gap, log);
            };
            let ap = (settings.step_fraction * ap).min(1.0);
            let ad = (settings.step_fraction * ad).min(1.0);
            let aff_gap: f64 = (0..it.s.len())
                .map(|k| (&it.s[k] + &pred.ds[k] * ap).dot(&(&it.zm[k] + &pred.dzm[k] * ad)))
                .sum();
            let sigma = (aff_gap / gap).clamp(0.0, 1.0).powi(3);
            sigma_mu = sigma * mu;
            correction = Some(
                pred.ds
                    .iter()
                    .zip(&pred.dzm)
                    .map(|(ds, dz)| ds * dz)
                    .collect(),
            );
        }

        let dir = it.direction(&chol, &s_inv, &rp, &rd, sigma_mu, correction.as_deref());
        let Some((ap, ad)) = it.step_lengths(&dir) else {
            return finish(SolveStatus::NumericalFailure, &it.z, gap, log);
        };
        let ap = (settings.step_fraction * ap).min(1.0);
        let ad = (settings.step_fraction * ad).min(1.0);

        log.push(IterationLog {
            mu,
            gap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            primal_step: ap,
            dual_step: ad,
        });

        it.z += &dir.dz * ap;
        for k in 0..it.s.len() {
            it.s[k] += &dir.ds[k] * ap;
            it.zm[k] += &dir.dzm[k] * ad;
            symmetrize(&mut it.s[k]);
            symmetrize(&mut it.zm[k]);
        }
    }

    finish(SolveStatus::MaxIterations, &it.z, last_gap, log)
}
