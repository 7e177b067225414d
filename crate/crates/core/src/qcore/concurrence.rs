//! Wootters concurrence for two-qubit density matrices.
//!
//! Works entirely with Hermitian matrices so the Jacobi solver is the only
//! eigensolver needed.

use num_complex::Complex64;

use super::eigen::hermitian_eigensystem;
use super::matrix::{ComplexMatrix, TOL};
use super::state::DensityMatrix;
use super::{QError, Result};

/// `sigma_y (x) sigma_y`.
pub fn sigma_yy() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::from_rows(&[
        vec![z, z, z, -one],
        vec![z, z, one, z],
        vec![z, one, z, z],
        vec![-one, z, z, z],
    ])
    .expect("4x4")
}

/// Spin-flipped state `(sy (x) sy) rho* (sy (x) sy)`.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = sigma_yy();
    &(&yy * &rho.conj()) * &yy
}

/// Positive square root; eigenvalues in `[-psd_slack, 0)` are clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let es = hermitian_eigensystem(m)?;
    let min = es.min_value();
    if min < -TOL.psd_slack {
        return Err(QError::NotPositive(min));
    }
    Ok(es.reconstruct_with(|w| w.max(0.0).sqrt()))
}

pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(QError::DimensionMismatch(4, rho.dim()));
    }
    let lambdas = wootters_lambdas(rho.matrix())?;
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Decreasing square roots of the eigenvalues of `sqrt(rho) rho_tilde sqrt(rho)`.
///
/// That matrix equals `F F^H` with `F = sqrt(rho) (sy (x) sy) conj(sqrt(rho))`,
/// so the lambdas are the singular values of `F`. They are read off as the
/// non-negative eigenvalues of the Hermitian dilation `[[0, F], [F^H, 0]]`,
/// which keeps near-zero lambdas at rounding level instead of the square
/// root of rounding level.
pub fn wootters_lambdas(rho: &ComplexMatrix) -> Result<[f64; 4]> {
    let root = psd_sqrt(rho)?;
    let f = &(&root * &sigma_yy()) * &root.conj();
    let mut dilation = ComplexMatrix::zeros(8);
    for i in 0..4 {
        for j in 0..4 {
            dilation[(i, j + 4)] = f[(i, j)];
            dilation[(j + 4, i)] = f[(i, j)].conj();
        }
    }
    let es = hermitian_eigensystem(&dilation)?;
    let mut lambdas = [0.0; 4];
    for (k, &w) in es.values.iter().rev().take(4).enumerate() {
        lambdas[k] = w.max(0.0);
    }
    Ok(lambdas)
}
