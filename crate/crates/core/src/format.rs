//! JSON matrix files: `{"name": ..., "dims": [...], "matrix": [[[re, im], ...], ...]}`.
//!
//! Floats are written in shortest round-trip form, so a write followed by a
//! read reproduces every entry bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, DensityOperator, HermitianOperator, C64, DENSITY_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_operator(op: &HermitianOperator, dims: &[usize], name: Option<&str>) -> Self {
        let m = op.matrix();
        Self {
            name: name.map(str::to_string),
            dims: dims.to_vec(),
            matrix: (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        }
    }

    pub fn from_density(rho: &DensityOperator, name: Option<&str>) -> Self {
        Self::from_operator(rho.op(), rho.dims(), name)
    }

    /// Checks the shape against `dims` and Hermiticity within `1e-9`, then
    /// symmetrises.
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        if self.dims.is_empty() {
            return Err(Error::Format("dims must not be empty".into()));
        }
        let n: usize = self.dims.iter().product();
        if self.matrix.len() != n || self.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Format(format!(
                "matrix must be {n}x{n} for dims {:?}",
                self.dims
            )));
        }
        let data = self
            .matrix
            .iter()
            .flatten()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        HermitianOperator::from_data(ComplexMatrix::new(n, n, data)?, DENSITY_TOL)
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.dims.clone(), self.to_operator()?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::random::rng_for;
    use rand::Rng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = rng_for(21, 0);
        for n in [2, 3, 6] {
            let a = ComplexMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.random_range(-1.0..1.0) / 3.0, rng.random::<f64>() * 1e-7)
            });
            let h = HermitianOperator::from_data(&a + &a.adjoint(), 1e-9).unwrap();
            let file = MatrixFile::from_operator(&h, &[n], Some("random"));
            let back = MatrixFile::from_json(&file.to_json().unwrap()).unwrap();
            assert_eq!(back, file);
            assert_eq!(back.to_operator().unwrap(), h);
        }
    }

    #[test]
    fn density_round_trip() {
        let rho = fixtures::rho_ab();
        let file = MatrixFile::from_density(&rho, None);
        assert!(!file.to_json().unwrap().contains("name"));
        assert_eq!(file.to_density().unwrap(), rho);
    }

    #[test]
    fn rejects_bad_input() {
        let bad_shape = r#"{"dims": [2, 2], "matrix": [[[1, 0]]]}"#;
        assert!(matches!(
            MatrixFile::from_json(bad_shape).unwrap().to_operator(),
            Err(Error::Format(_))
        ));
        let not_herm = r#"{"dims": [2], "matrix": [[[0.5, 0], [0.1, 0]], [[0, 0], [0.5, 0]]]}"#;
        assert!(matches!(
            MatrixFile::from_json(not_herm).unwrap().to_operator(),
            Err(Error::NotHermitian { .. })
        ));
        let short_trace = r#"{"dims": [2], "matrix": [[[0.45, 0], [0, 0]], [[0, 0], [0.45, 0]]]}"#;
        let err = MatrixFile::from_json(short_trace).unwrap().to_density().unwrap_err();
        assert!(err.to_string().contains("trace"), "{err}");
        assert!(matches!(
            MatrixFile::from_json("{\"dims\": [2]}"),
            Err(Error::Format(_))
        ));
    }
}
