//! Linear fractional representations `F(Δ) = A + BΔ(I - DΔ)⁻¹C` with a
//! diagonal uncertainty `Δ = Diag(δ_1 I_{r_1}, ..., δ_k I_{r_k})` whose
//! entries are coefficients `a_i` or their conjugates.

use crate::error::{Error, Result};
use crate::hermitian::{block, ComplexMatrix, HermitianOperator, C64};

/// Condition threshold on `‖(I - DΔ)⁻¹‖` beyond which an LFR counts as
/// ill-posed.
pub const ILL_POSED_THRESHOLD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeltaEntry {
    /// Index into the coefficient vector `a`.
    pub param: usize,
    pub conjugated: bool,
    pub repetition: usize,
}

impl DeltaEntry {
    pub fn plain(param: usize, repetition: usize) -> Self {
        Self {
            param,
            conjugated: false,
            repetition,
        }
    }

    pub fn conj(param: usize, repetition: usize) -> Self {
        Self {
            param,
            conjugated: true,
            repetition,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaStructure {
    entries: Vec<DeltaEntry>,
}

impl DeltaStructure {
    pub fn new(entries: Vec<DeltaEntry>) -> Result<Self> {
        if entries.iter().any(|e| e.repetition == 0) {
            return Err(Error::InvalidProblem("zero repetition in Δ structure".into()));
        }
        if entries.is_empty() {
            return Err(Error::InvalidProblem("Δ structure must be non-empty".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[DeltaEntry] {
        &self.entries
    }

    /// `N = Σ r_i`.
    pub fn size(&self) -> usize {
        self.entries.iter().map(|e| e.repetition).sum()
    }

    /// Smallest coefficient-vector length the structure can be evaluated at.
    pub fn num_params(&self) -> usize {
        self.entries.iter().map(|e| e.param + 1).max().unwrap_or(0)
    }

    fn concat(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.iter().chain(&other.entries).copied().collect(),
        }
    }
}

/// Diagonal `Δ` for the given coefficients.
pub fn build_delta(structure: &DeltaStructure, a: &[C64]) -> Result<ComplexMatrix> {
    if structure.num_params() > a.len() {
        return Err(Error::DimensionMismatch(format!(
            "Δ structure references {} coefficients, {} supplied",
            structure.num_params(),
            a.len()
        )));
    }
    let diag: Vec<C64> = structure
        .entries
        .iter()
        .flat_map(|e| {
            let v = if e.conjugated { a[e.param].conj() } else { a[e.param] };
            std::iter::repeat_n(v, e.repetition)
        })
        .collect();
    Ok(ComplexMatrix::diag(&diag))
}

#[derive(Clone, Debug)]
pub struct Lfr {
    a: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
    d: ComplexMatrix,
    structure: DeltaStructure,
}

impl Lfr {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
        structure: DeltaStructure,
    ) -> Result<Self> {
        let (n, cols) = a.shape();
        let size = structure.size();
        let shapes = [
            ("B", b.shape(), (n, size)),
            ("C", c.shape(), (size, cols)),
            ("D", d.shape(), (size, size)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::DimensionMismatch(format!(
                    "LFR {name} is {}x{}, expected {}x{}",
                    got.0, got.1, want.0, want.1
                )));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            structure,
        })
    }

    /// `F(Δ) = A`, carried with a single inert `Δ` entry on coefficient 0.
    pub fn constant(a: ComplexMatrix) -> Self {
        let (n, c) = a.shape();
        Self {
            a,
            b: ComplexMatrix::zeros(n, 1),
            c: ComplexMatrix::zeros(1, c),
            d: ComplexMatrix::zeros(1, 1),
            structure: DeltaStructure::new(vec![DeltaEntry::plain(0, 1)]).unwrap(),
        }
    }

    /// `F = M · a_param` (or `M · a_param*`).
    pub fn scaled_parameter(param: usize, conjugated: bool, m: ComplexMatrix) -> Self {
        let (n, c) = m.shape();
        Self {
            a: ComplexMatrix::zeros(n, c),
            b: m,
            c: ComplexMatrix::identity(c),
            d: ComplexMatrix::zeros(c, c),
            structure: DeltaStructure::new(vec![DeltaEntry {
                param,
                conjugated,
                repetition: c,
            }])
            .unwrap(),
        }
    }

    /// Scalar `F = a_param` (or its conjugate).
    pub fn parameter(param: usize, conjugated: bool) -> Self {
        Self::scaled_parameter(param, conjugated, ComplexMatrix::identity(1))
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }

    pub fn structure(&self) -> &DeltaStructure {
        &self.structure
    }

    /// Output shape `n × c`.
    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    pub fn eval(&self, a: &[C64]) -> Result<ComplexMatrix> {
        let delta = build_delta(&self.structure, a)?;
        let k = &ComplexMatrix::identity(self.structure.size()) - &(&self.d * &delta);
        let inv = k.inverse().ok_or(Error::IllPosed(f64::INFINITY))?;
        let norm = inv.frobenius_norm();
        if norm > ILL_POSED_THRESHOLD {
            return Err(Error::IllPosed(norm));
        }
        Ok(&self.a + &(&(&self.b * &delta) * &(&inv * &self.c)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {:?} and {:?} LFRs",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            a: &self.a + &other.a,
            b: ComplexMatrix::hstack(&[&self.b, &other.b]),
            c: ComplexMatrix::vstack(&[&self.c, &other.c]),
            d: ComplexMatrix::block_diag(&[&self.d, &other.d]),
            structure: self.structure.concat(&other.structure),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.shape().1 != other.shape().0 {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {:?} by {:?} LFRs",
                self.shape(),
                other.shape()
            )));
        }
        let (n1, n2) = (self.structure.size(), other.structure.size());
        let mut d = ComplexMatrix::zeros(n1 + n2, n1 + n2);
        d.set_submatrix(0, 0, &self.d);
        d.set_submatrix(0, n1, &(&self.c * &other.b));
        d.set_submatrix(n1, n1, &other.d);
        Ok(Self {
            a: &self.a * &other.a,
            b: ComplexMatrix::hstack(&[&self.b, &(&self.a * &other.b)]),
            c: ComplexMatrix::vstack(&[&(&self.c * &other.a), &other.c]),
            d,
            structure: self.structure.concat(&other.structure),
        })
    }
}

/// `Δ = Diag(a_1 I_{d_A d_B}, ..., a_{d_A} I_{d_A d_B}, a_1* I_{d_B}, ..., a_{d_A}* I_{d_B})`.
pub fn witness_structure(d_a: usize, d_b: usize) -> DeltaStructure {
    let entries = (0..d_a)
        .map(|j| DeltaEntry::plain(j, d_a * d_b))
        .chain((0..d_a).map(|i| DeltaEntry::conj(i, d_b)))
        .collect();
    DeltaStructure::new(entries).expect("d_A, d_B ≥ 1")
}

/// LFR of `a ↦ Σ_ij a_i* a_j W_ij` with `A = 0` and nilpotent `D`.
///
/// Signal flow: the conjugated group copies the input `u` into `[a_i* u]_i`;
/// `D` feeds that stack into every plain block `j`, which scales it by `a_j`;
/// `B` reads plain block `j`, sub-block `i` through `W_ij`.
pub fn witness_lfr(w: &HermitianOperator, d_a: usize, d_b: usize) -> Result<Lfr> {
    if w.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {} is not {d_a}·{d_b}",
            w.dim()
        )));
    }
    let plain = d_a * d_a * d_b;
    let conj = d_a * d_b;
    let size = plain + conj;

    let mut b = ComplexMatrix::zeros(d_b, size);
    for j in 0..d_a {
        for i in 0..d_a {
            b.set_submatrix(0, j * d_a * d_b + i * d_b, &block(w, i, j, d_a, d_b)?);
        }
    }
    let mut c = ComplexMatrix::zeros(size, d_b);
    let mut d = ComplexMatrix::zeros(size, size);
    let id_b = ComplexMatrix::identity(d_b);
    let id_ab = ComplexMatrix::identity(conj);
    for i in 0..d_a {
        c.set_submatrix(plain + i * d_b, 0, &id_b);
    }
    for j in 0..d_a {
        d.set_submatrix(j * conj, plain, &id_ab);
    }
    Lfr::new(
        ComplexMatrix::zeros(d_b, d_b),
        b,
        c,
        d,
        witness_structure(d_a, d_b),
    )
}
