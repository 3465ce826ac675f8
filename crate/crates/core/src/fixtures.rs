//! Reference states and operators on two qubits (and three, for GHZ).

use crate::hermitian::{ComplexMatrix, DensityOperator, HermitianOperator, C64};

fn real_op(n: usize, values: &[f64]) -> HermitianOperator {
    HermitianOperator::from_data(ComplexMatrix::from_real(n, n, values).unwrap(), 1e-12).unwrap()
}

/// `(|00> + |11>)/√2`.
pub fn bell_state() -> DensityOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [s, 0.0, 0.0, s].map(|v| C64::new(v, 0.0));
    DensityOperator::pure(vec![2, 2], &psi).unwrap()
}

/// Optimal witness for the Bell state:
/// `-½(|00><11| + |11><00|) + ½(|01><01| + |10><10|)`.
pub fn bell_oew() -> HermitianOperator {
    real_op(
        4,
        &[
            0.0, 0.0, 0.0, -0.5, //
            0.0, 0.5, 0.0, 0.0, //
            0.0, 0.0, 0.5, 0.0, //
            -0.5, 0.0, 0.0, 0.0,
        ],
    )
}

/// Entangled member of the isospectral pair; its partial transpose is not
/// positive.
pub fn rho_ab() -> DensityOperator {
    let t = 1.0 / 3.0;
    let op = real_op(
        4,
        &[
            t, 0.0, 0.0, 0.0, //
            0.0, t, t, 0.0, //
            0.0, t, t, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        ],
    );
    DensityOperator::new(vec![2, 2], op).unwrap()
}

/// Separable member of the isospectral pair, `diag(1/3, 0, 0, 2/3)`.
pub fn sigma_ab() -> DensityOperator {
    DensityOperator::new(
        vec![2, 2],
        HermitianOperator::real_diag(&[1.0 / 3.0, 0.0, 0.0, 2.0 / 3.0]),
    )
    .unwrap()
}

/// Reference relaxation witness for [`rho_ab`], given to four decimals (trace 0.9999).
pub fn rho_ab_reference_witness() -> HermitianOperator {
    real_op(
        4,
        &[
            0.1752, 0.0, 0.0, 0.0, //
            0.0, 0.1752, -0.2478, 0.0, //
            0.0, -0.2478, 0.0513, 0.0, //
            0.0, 0.0, 0.0, 0.5982,
        ],
    )
}

/// Reference relaxation witness for the Bell state, given to four decimals.
pub fn bell_reference_witness() -> HermitianOperator {
    real_op(
        4,
        &[
            0.1057, 0.0, 0.0, -0.2887, //
            0.0, 0.3943, 0.0, 0.0, //
            0.0, 0.0, 0.3943, 0.0, //
            -0.2887, 0.0, 0.0, 0.1057,
        ],
    )
}

/// `(|000> + |111>)/√2`.
pub fn ghz_state() -> DensityOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![C64::new(0.0, 0.0); 8];
    psi[0] = C64::new(s, 0.0);
    psi[7] = C64::new(s, 0.0);
    DensityOperator::pure(vec![2, 2, 2], &psi).unwrap()
}
