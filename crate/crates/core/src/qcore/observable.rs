//! Exchange projectors, the collective observables V1/V2, and Born-rule sampling.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, TOL};
use super::state::{labels, reorder_operator, DensityMatrix, Labels};
use super::states::{pair_labels, LAB_MAJOR_LABELS};
use super::{QError, Result};

/// Two-qubit SWAP: `|ab> -> |ba>`.
pub fn swap_operator() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
    .expect("4x4")
}

/// `(P_minus, P_plus)` = `((I - SWAP)/2, (I + SWAP)/2)` on two qubits.
pub fn exchange_projectors() -> (ComplexMatrix, ComplexMatrix) {
    let id = ComplexMatrix::identity(4);
    let swap = swap_operator();
    ((&id - &swap).scale(0.5), (&id + &swap).scale(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableLabel {
    V1,
    V2,
}

impl fmt::Display for ObservableLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableLabel::V1 => write!(f, "v1"),
            ObservableLabel::V2 => write!(f, "v2"),
        }
    }
}

impl FromStr for ObservableLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "v1" => Ok(ObservableLabel::V1),
            "v2" => Ok(ObservableLabel::V2),
            other => Err(format!("unknown observable {other:?} (expected v1 or v2)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralTerm {
    pub eigenvalue: f64,
    pub projector: ComplexMatrix,
}

/// Hermitian operator on `[A1, B1, A2, B2]` with its spectral projectors,
/// ordered by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct Observable {
    label: ObservableLabel,
    matrix: ComplexMatrix,
    spectrum: Vec<SpectralTerm>,
    labels: Labels,
}

impl Observable {
    pub fn label(&self) -> ObservableLabel {
        self.label
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &[SpectralTerm] {
        &self.spectrum
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.spectrum.iter().map(|t| t.eigenvalue).collect()
    }
}

/// `V1 = 4 (P^A_- - P^A_+) (x) P^B_-`, `V2 = 4 P^A_- (x) (P^B_- - P^B_+)`.
///
/// The A-side projectors act on `(A1, A2)` and the B-side ones on `(B1, B2)`.
/// Built lab-major and reordered to copy-major.
pub fn build_observable(label: ObservableLabel) -> Observable {
    let (pm, pp) = exchange_projectors();
    let id = ComplexMatrix::identity(4);
    let lab_major = labels(&LAB_MAJOR_LABELS);
    let copy_major = pair_labels();
    let lift = |a: &ComplexMatrix, b: &ComplexMatrix| {
        let m = a.kron(b).expect("16x16");
        reorder_operator(&m, &lab_major, &copy_major).expect("fixed layout")
    };
    let (plus, minus, zero) = match label {
        ObservableLabel::V1 => (lift(&pm, &pm), lift(&pp, &pm), lift(&id, &pp)),
        ObservableLabel::V2 => (lift(&pm, &pm), lift(&pm, &pp), lift(&pp, &id)),
    };
    let matrix = (&plus - &minus).scale(4.0);
    Observable {
        label,
        matrix,
        spectrum: vec![
            SpectralTerm {
                eigenvalue: -4.0,
                projector: minus,
            },
            SpectralTerm {
                eigenvalue: 0.0,
                projector: zero,
            },
            SpectralTerm {
                eigenvalue: 4.0,
                projector: plus,
            },
        ],
        labels: copy_major,
    }
}

fn check_registers(obs: &Observable, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != obs.matrix.dim() {
        return Err(QError::DimensionMismatch(obs.matrix.dim(), rho.dim()));
    }
    if rho.labels() != obs.labels() {
        return Err(QError::LabelMismatch(format!(
            "observable acts on {:?}, state is on {:?}",
            obs.labels(),
            rho.labels()
        )));
    }
    Ok(())
}

/// `Tr(rho V)`.
pub fn expectation(obs: &Observable, rho: &DensityMatrix) -> Result<f64> {
    check_registers(obs, rho)?;
    let tr = rho.matrix().trace_product(&obs.matrix)?;
    if tr.im.abs() > TOL.imaginary_residual {
        return Err(QError::NumericalIntegrity(format!(
            "imaginary part {} in expectation value",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// Outcome probabilities of a projective measurement on a fixed state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornDistribution {
    pub outcomes: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl BornDistribution {
    pub fn new(obs: &Observable, rho: &DensityMatrix) -> Result<Self> {
        check_registers(obs, rho)?;
        let drift = TOL.born_drift;
        let mut probabilities = Vec::with_capacity(obs.spectrum.len());
        for term in &obs.spectrum {
            let p: Complex64 = term.projector.trace_product(rho.matrix())?;
            if p.im.abs() > drift || p.re < -drift || p.re > 1.0 + drift {
                return Err(QError::NumericalIntegrity(format!(
                    "Born probability {p} for outcome {}",
                    term.eigenvalue
                )));
            }
            probabilities.push(p.re.clamp(0.0, 1.0));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > drift {
            return Err(QError::NumericalIntegrity(format!(
                "Born probabilities sum to {total}"
            )));
        }
        for p in &mut probabilities {
            *p /= total;
        }
        Ok(Self {
            outcomes: obs.outcomes(),
            probabilities,
        })
    }

    pub fn mean(&self) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probabilities)
            .map(|(o, p)| o * p)
            .sum()
    }

    /// Index into `outcomes` drawn by inverse CDF.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        // u landed in the rounding gap above the last partial sum
        self.probabilities
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(self.probabilities.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.outcomes[self.sample_index(rng)]
    }
}

/// Draws one measurement outcome of `obs` on `rho`.
pub fn sample_outcome<R: Rng + ?Sized>(
    obs: &Observable,
    rho: &DensityMatrix,
    rng: &mut R,
) -> Result<f64> {
    Ok(BornDistribution::new(obs, rho)?.sample(rng))
}
