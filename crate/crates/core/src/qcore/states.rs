//! Named two-qubit states, the four-qubit counterexample, and random state generators.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::state::{labels, DensityMatrix, Ket, Labels};
use super::{QError, Result};

/// Copy-major register order used for a pair of copies.
pub const PAIR_LABELS: [&str; 4] = ["A1", "B1", "A2", "B2"];
/// Lab-major order of the same four qubits.
pub const LAB_MAJOR_LABELS: [&str; 4] = ["A1", "A2", "B1", "B2"];

pub fn pair_labels() -> Labels {
    labels(&PAIR_LABELS)
}

pub fn copy_labels(copy: usize) -> Labels {
    vec![format!("A{copy}"), format!("B{copy}")]
}

/// `(|01> - |10>)/sqrt(2)` on two qubits.
pub fn singlet(lab: Labels) -> Ket {
    let z = Complex64::new(0.0, 0.0);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ket::new(vec![z, h, -h, z], lab).expect("two labels for a two-qubit singlet")
}

/// Product of an A-side singlet and a B-side singlet, stored as `[A1, B1, A2, B2]`.
///
/// No qubit in Alice's lab is entangled with any qubit in Bob's lab, yet both
/// collective observables take their maximal value 4 on this state.
pub fn counterexample_state() -> Ket {
    let sa = singlet(labels(&["A1", "A2"]));
    let sb = singlet(labels(&["B1", "B2"]));
    sa.tensor(&sb)
        .and_then(|k| k.reorder(&pair_labels()))
        .expect("fixed four-qubit layout")
}

/// `cos(theta)|00> + sin(theta)|11>` with `theta` in `[0, pi/4]`.
pub fn schmidt(theta: f64, lab: Labels) -> Result<Ket> {
    if !(0.0..=FRAC_PI_4 + 1e-15).contains(&theta) {
        return Err(QError::ParameterOutOfRange(format!(
            "schmidt angle {theta}"
        )));
    }
    let z = Complex64::new(0.0, 0.0);
    Ket::new(
        vec![
            Complex64::new(theta.cos(), 0.0),
            z,
            z,
            Complex64::new(theta.sin(), 0.0),
        ],
        lab,
    )
}

/// `p * |singlet><singlet| + (1 - p) * I/4`.
pub fn werner(p: f64, lab: Labels) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QError::ParameterOutOfRange(format!("werner weight {p}")));
    }
    let s = singlet(lab.clone()).to_density();
    let mm = DensityMatrix::maximally_mixed(lab)?;
    s.mix(&mm, p)
}

/// Fixture families for random two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    /// Haar-random pure state.
    PureHaar,
    /// Ginibre-style mixed state of rank at most `k` (1..=4).
    MixedRank(usize),
    Werner(f64),
    Schmidt(f64),
}

/// Output of [`random_state`]: pure families return a ket.
#[derive(Debug, Clone)]
pub enum GeneratedState {
    Ket(Ket),
    Density(DensityMatrix),
}

impl GeneratedState {
    pub fn into_density(self) -> DensityMatrix {
        match self {
            GeneratedState::Ket(k) => k.to_density(),
            GeneratedState::Density(d) => d,
        }
    }
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state<R: Rng + ?Sized>(
    kind: StateKind,
    lab: Labels,
    rng: &mut R,
) -> Result<GeneratedState> {
    match kind {
        StateKind::PureHaar => {
            let dim = 1usize << lab.len();
            let amps = (0..dim).map(|_| gaussian_complex(rng)).collect();
            Ok(GeneratedState::Ket(Ket::normalized(amps, lab)?))
        }
        StateKind::MixedRank(k) => {
            if !(1..=4).contains(&k) {
                return Err(QError::ParameterOutOfRange(format!("rank {k}")));
            }
            Ok(GeneratedState::Density(random_mixed(k, lab, rng)?))
        }
        StateKind::Werner(p) => Ok(GeneratedState::Density(werner(p, lab)?)),
        StateKind::Schmidt(theta) => Ok(GeneratedState::Ket(schmidt(theta, lab)?)),
    }
}

/// `G G^H / Tr(G G^H)` for a `dim x k` complex Gaussian `G`.
pub fn random_mixed<R: Rng + ?Sized>(k: usize, lab: Labels, rng: &mut R) -> Result<DensityMatrix> {
    let dim = 1usize << lab.len();
    let g: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..k).map(|_| gaussian_complex(rng)).collect())
        .collect();
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = (0..k).map(|c| g[i][c] * g[j][c].conj()).sum();
        }
    }
    let tr = m.trace().re;
    let mut m = m.scale(1.0 / tr);
    // enforce exact Hermiticity after rounding
    for i in 0..dim {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..dim {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    DensityMatrix::new(m, lab)
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let mut u = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}
