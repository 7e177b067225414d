//! Cyclic Jacobi diagonalization of small Hermitian matrices.
//!
//! Each rotation is the product of a diagonal phase (which makes the pivot
//! `a_pq` real) and a real Givens rotation, so `R^H A R` annihilates the
//! pivot exactly. Sweeps visit every upper-triangular pivot in row order
//! until the off-diagonal Frobenius norm drops below
//! `tol * max(1, ||A||_F)`.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, TOL};
use super::{QError, Result};

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
    pub sweeps: usize,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V f(diag(w)) V^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &w) in self.values.iter().enumerate() {
            let fw = f(w);
            if fw == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fw;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|w| w)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes `m` with default tolerances.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    hermitian_eigensystem_with(m, TOL.jacobi_offdiag, TOL.jacobi_max_sweeps)
}

pub fn hermitian_eigensystem_with(
    m: &ComplexMatrix,
    tol: f64,
    max_sweeps: usize,
) -> Result<Eigensystem> {
    let defect = m.hermiticity_defect();
    if defect > TOL.hermiticity {
        return Err(QError::NotHermitian(defect));
    }
    let n = m.dim();
    // symmetrize so the diagonal is exactly real
    let mut a = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol * a.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > threshold {
        if sweeps == max_sweeps {
            return Err(QError::NoConvergence {
                sweeps,
                residual: off_diagonal_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_k)] = v[(i, old_k)];
        }
    }
    Ok(Eigensystem {
        values,
        vectors,
        sweeps,
    })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let abs_g = g.norm();
    if abs_g < f64::MIN_POSITIVE {
        return;
    }
    let n = a.dim();
    let u = g / abs_g;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * abs_g);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ubar = u.conj();

    // A <- A R, with R_pp = c, R_pq = s, R_qp = -s conj(u), R_qq = c conj(u)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * ubar * s;
        a[(k, q)] = akp * s + akq * ubar * c;
    }
    // A <- R^H A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * u * s;
        a[(q, k)] = apk * s + aqk * u * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ubar * s;
        v[(k, q)] = vkp * s + vkq * ubar * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn diagonal_input() {
        let m = ComplexMatrix::from_real_rows(&[
            &[3.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 4.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ])
        .unwrap();
        let es = hermitian_eigensystem(&m).unwrap();
        assert_eq!(es.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(es.sweeps, 0);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let es = hermitian_eigensystem(&x).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_y_has_complex_eigenvectors() {
        let y = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        let es = hermitian_eigensystem(&y).unwrap();
        assert!(es.reconstruct().approx_eq(&y, 1e-14));
        let v = es.vector(1);
        let yv = y.apply(&v).unwrap();
        for (a, b) in yv.iter().zip(&v) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 4, 8, 16] {
            for _ in 0..25 {
                let h = random_hermitian(n, &mut rng);
                let es = hermitian_eigensystem(&h).unwrap();
                assert!(es.reconstruct().max_abs_diff(&h) <= 1e-10);
                // V is unitary
                let vhv = &es.vectors.dagger() * &es.vectors;
                assert!(vhv.approx_eq(&ComplexMatrix::identity(n), 1e-12));
                assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let i4 = ComplexMatrix::identity(4).scale(0.25);
        let es = hermitian_eigensystem(&i4).unwrap();
        assert!(es.values.iter().all(|&w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eigensystem(&m),
            Err(QError::NotHermitian(_))
        ));
    }

    #[test]
    fn sweep_budget_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(8, &mut rng);
        assert!(matches!(
            hermitian_eigensystem_with(&h, 1e-12, 0),
            Err(QError::NoConvergence { sweeps: 0, .. })
        ));
    }
}
