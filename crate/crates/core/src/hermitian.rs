//! Dense complex linear algebra for operators on finite-dimensional tensor
//! product spaces.
//!
//! Product bases are ordered with the leftmost subsystem varying slowest:
//! `|i>_A ⊗ |k>_B` sits at index `i * d_B + k`. Every routine here that
//! splits or merges subsystems assumes that layout.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum entrywise `|H - H†|` accepted by [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace and positivity slack for [`DensityOperator`].
pub const DENSITY_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Column vector.
    pub fn column(values: &[C64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    /// `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0_f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        assert!(row0 + rows <= self.rows && col0 + cols <= self.cols);
        Self::from_fn(rows, cols, |r, c| self[(row0 + r, col0 + c)])
    }

    pub fn set_submatrix(&mut self, row0: usize, col0: usize, src: &Self) {
        assert!(row0 + src.rows <= self.rows && col0 + src.cols <= self.cols);
        for r in 0..src.rows {
            for c in 0..src.cols {
                self[(row0 + r, col0 + c)] = src[(r, c)];
            }
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self · v` for a vector `v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_submatrix(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// `[a b ...]`, side by side.
    pub fn hstack(blocks: &[&Self]) -> Self {
        let rows = blocks.first().map_or(0, |b| b.rows);
        assert!(blocks.iter().all(|b| b.rows == rows), "hstack row mismatch");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c = 0;
        for b in blocks {
            out.set_submatrix(0, c, b);
            c += b.cols;
        }
        out
    }

    /// `[a; b; ...]`, stacked vertically.
    pub fn vstack(blocks: &[&Self]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        assert!(blocks.iter().all(|b| b.cols == cols), "vstack column mismatch");
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r = 0;
        for b in blocks {
            out.set_submatrix(r, 0, b);
            r += b.rows;
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting. Returns
    /// `None` when a pivot underflows relative to the matrix scale.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap();
            if a[(pivot, col)].norm() <= 1e-300_f64.max(scale * f64::EPSILON * 1e-4) {
                return None;
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                    inv.data.swap(pivot * n + c, col * n + c);
                }
            }
            let p = a[(col, col)].inv();
            for c in 0..n {
                a[(col, c)] *= p;
                inv[(col, c)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    let ac = a[(col, c)];
                    let ic = inv[(col, c)];
                    a[(r, c)] -= f * ac;
                    inv[(r, c)] -= f * ic;
                }
            }
        }
        Some(inv)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product: `(a⊗b)[i·rb + k, j·cb + l] = a[i, j]·b[k, l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = b.shape();
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Hermitian matrix, `H = H†` to within [`HERMITIAN_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// Accepts a square matrix whose Hermiticity defect is at most `tol` and
    /// replaces it by `(M + M†)/2`.
    pub fn from_data(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(matrix))
    }

    fn symmetrized(matrix: ComplexMatrix) -> Self {
        let n = matrix.rows;
        let mut m = matrix;
        for r in 0..n {
            m[(r, r)] = C64::new(m[(r, r)].re, 0.0);
            for c in r + 1..n {
                let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
                m[(r, c)] = avg;
                m[(c, r)] = avg.conj();
            }
        }
        Self { matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn real_diag(values: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::real_diag(values),
        }
    }

    /// `|ψ><ψ|`.
    pub fn projector(psi: &[C64]) -> Self {
        Self::symmetrized(ComplexMatrix::outer(psi, psi))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::symmetrized(&self.matrix + &other.matrix)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        jacobi_eigh(&self.matrix, false).0
    }

    /// Ascending eigenvalues and the matching orthonormal eigenvectors as
    /// columns.
    pub fn eigh(&self) -> (Vec<f64>, ComplexMatrix) {
        let (vals, vecs) = jacobi_eigh(&self.matrix, true);
        (vals, vecs.expect("vectors requested"))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Eigenvector of the smallest eigenvalue.
    pub fn min_eigenpair(&self) -> (f64, Vec<C64>) {
        let (vals, vecs) = self.eigh();
        let n = self.dim();
        (vals[0], (0..n).map(|r| vecs[(r, 0)]).collect())
    }

    /// `<v|H|v>`, real part.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let hv = self.matrix.apply(v);
        v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }
}

/// Cyclic Jacobi diagonalisation of a Hermitian matrix. Eigenvalues come back
/// ascending; eigenvectors, when requested, are the columns of the unitary.
fn jacobi_eigh(h: &ComplexMatrix, want_vectors: bool) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = h.rows;
    let mut a = h.clone();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = [[c, s·e], [-s·ē, c]] on the (p, q) plane; A ← J† A J.
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * jqp.conj();
                    a[(q, k)] = apk * jpq.conj() + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c + vkq * jqp;
                        v[(k, q)] = vkp * jpq + vkq * c;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]));
    (values, vectors)
}

/// Density operator on `H_1 ⊗ ... ⊗ H_n`: Hermitian, unit trace, PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(dims: Vec<usize>, op: HermitianOperator) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDensity("empty subsystem list".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDensity(format!(
                "subsystem dimension {d} is below 2"
            )));
        }
        let total: usize = dims.iter().product();
        if total != op.dim() {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions {dims:?} give {total}, operator has dimension {}",
                op.dim()
            )));
        }
        let trace = op.trace();
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace must equal 1 (got {trace})"
            )));
        }
        let min = op.min_eigenvalue();
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "operator must be positive semidefinite (minimum eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { dims, op })
    }

    /// Pure state `|ψ><ψ|` after normalising `ψ`.
    pub fn pure(dims: Vec<usize>, psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let unit: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(dims, HermitianOperator::projector(&unit))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    /// `(d_A, d_B)` for a bipartite state.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::NotBipartite(self.dims.len())),
        }
    }
}

/// `W_ij = <i|_A W |j>_A`, the `d_B × d_B` block at block-row `i`, block-column `j`.
pub fn block(
    w: &HermitianOperator,
    i: usize,
    j: usize,
    d_a: usize,
    d_b: usize,
) -> Result<ComplexMatrix> {
    if w.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {} is not {d_a}·{d_b}",
            w.dim()
        )));
    }
    for idx in [i, j] {
        if idx >= d_a {
            return Err(Error::IndexOutOfRange {
                index: idx,
                limit: d_a,
            });
        }
    }
    Ok(w.matrix.submatrix(i * d_b, j * d_b, d_b, d_b))
}

pub fn eigenvalues(h: &HermitianOperator) -> Vec<f64> {
    h.eigenvalues()
}

pub fn is_psd(h: &HermitianOperator, tol: f64) -> bool {
    h.min_eigenvalue() >= -tol
}

/// `Re Tr(AB)`.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace product of {}- and {}-dimensional operators",
            a.dim(),
            b.dim()
        )));
    }
    let n = a.dim();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            acc += a.matrix[(r, c)] * b.matrix[(c, r)];
        }
    }
    Ok(acc.re)
}

/// Splits a flat index into per-subsystem digits.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub(crate) fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Transposes subsystem `sys` of an operator on `⊗ dims`.
pub fn partial_transpose_op(
    op: &HermitianOperator,
    dims: &[usize],
    sys: usize,
) -> Result<HermitianOperator> {
    if sys >= dims.len() {
        return Err(Error::IndexOutOfRange {
            index: sys,
            limit: dims.len(),
        });
    }
    let n = op.dim();
    if dims.iter().product::<usize>() != n {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} do not multiply to {n}"
        )));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let mut rd = digits(r, dims);
        for c in 0..n {
            let mut cd = digits(c, dims);
            std::mem::swap(&mut rd[sys], &mut cd[sys]);
            out[(r, c)] = op.matrix[(flat_index(&rd, dims), flat_index(&cd, dims))];
            std::mem::swap(&mut rd[sys], &mut cd[sys]);
        }
    }
    Ok(HermitianOperator::symmetrized(out))
}

pub fn partial_transpose(rho: &DensityOperator, sys: usize) -> Result<HermitianOperator> {
    partial_transpose_op(&rho.op, &rho.dims, sys)
}

/// Reorders the tensor factors of `op`: factor `order[k]` of the input
/// becomes factor `k` of the output.
pub fn permute_subsystems(
    op: &HermitianOperator,
    dims: &[usize],
    order: &[usize],
) -> Result<HermitianOperator> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() || order.iter().any(|&k| k >= dims.len() || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::InvalidProblem(format!(
            "{order:?} is not a permutation of {} subsystems",
            dims.len()
        )));
    }
    let n = op.dim();
    if dims.iter().product::<usize>() != n {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} do not multiply to {n}"
        )));
    }
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    // position of each new flat index in the old basis
    let map: Vec<usize> = (0..n)
        .map(|idx| {
            let nd = digits(idx, &new_dims);
            let mut od = vec![0; dims.len()];
            for (k, &src) in order.iter().enumerate() {
                od[src] = nd[k];
            }
            flat_index(&od, dims)
        })
        .collect();
    let out = ComplexMatrix::from_fn(n, n, |r, c| op.matrix[(map[r], map[c])]);
    Ok(HermitianOperator { matrix: out })
}
