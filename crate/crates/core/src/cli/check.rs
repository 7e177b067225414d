//! Product-state check of `C(rho1) C(rho2) >= Tr((rho1 (x) rho2) V_i)` and the
//! counterexample that breaks it once the copies are correlated.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::qcore::observable::{build_observable, expectation, Observable, ObservableLabel};
use crate::qcore::state::{labels, DensityMatrix, Labels};
use crate::qcore::states::{
    copy_labels, counterexample_state, random_state, random_unitary, StateKind,
};
use crate::qcore::{concurrence, ComplexMatrix, Result};

/// Slack allowed before a product-state sample counts as a violation.
pub const BOUND_SLACK: f64 = 1e-9;

const MAX_REPORTED: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub observable: ObservableLabel,
    pub lhs: f64,
    pub rhs: f64,
    pub rho1: ComplexMatrix,
    pub rho2: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductPhase {
    pub samples: u64,
    pub checks: u64,
    pub violations: u64,
    /// Largest `rhs - lhs` seen; negative when the bound held with margin everywhere.
    pub max_excess: f64,
    pub offending: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexamplePhase {
    pub lhs: f64,
    pub rhs_v1: f64,
    pub rhs_v2: f64,
    pub violation_detected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheckReport {
    pub seed: u64,
    pub product_states: ProductPhase,
    pub counterexample: CounterexamplePhase,
    pub pass: bool,
}

fn random_local_unitary<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    random_unitary(2, rng)
        .kron(&random_unitary(2, rng))
        .expect("4x4")
}

/// One random two-qubit fixture; cycles through the generator families and
/// dresses the fixed-basis ones with random local unitaries.
pub fn random_fixture<R: Rng + ?Sized>(
    index: u64,
    lab: Labels,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let kind = match index % 7 {
        0 => StateKind::PureHaar,
        1 => StateKind::MixedRank(1),
        2 => StateKind::MixedRank(2),
        3 => StateKind::MixedRank(3),
        4 => StateKind::MixedRank(4),
        5 => StateKind::Werner(rng.random_range(0.0..=1.0)),
        _ => StateKind::Schmidt(rng.random_range(0.0..=FRAC_PI_4)),
    };
    let rho = random_state(kind, lab, rng)?.into_density();
    match kind {
        StateKind::Werner(_) | StateKind::Schmidt(_) => rho.evolve(&random_local_unitary(rng)),
        _ => Ok(rho),
    }
}

/// Runs `samples` random product pairs (every fourth pair uses two identical
/// copies, where the bound is tight for pure states) against both observables,
/// then evaluates the counterexample.
pub fn check_product_bound(samples: u64, seed: u64) -> Result<BoundCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observables = [
        build_observable(ObservableLabel::V1),
        build_observable(ObservableLabel::V2),
    ];
    let mut phase = ProductPhase {
        samples,
        checks: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        offending: Vec::new(),
    };
    for s in 0..samples {
        let rho1 = random_fixture(s, copy_labels(1), &mut rng)?;
        let rho2 = if s % 4 == 3 {
            rho1.relabeled(copy_labels(2))?
        } else {
            // shifted index so every pair of families occurs
            random_fixture(s / 7 + s, copy_labels(2), &mut rng)?
        };
        let lhs = concurrence(&rho1)? * concurrence(&rho2)?;
        let pair = rho1.tensor(&rho2)?;
        for obs in &observables {
            let rhs = expectation(obs, &pair)?;
            phase.checks += 1;
            phase.max_excess = phase.max_excess.max(rhs - lhs);
            if rhs > lhs + BOUND_SLACK {
                phase.violations += 1;
                if phase.offending.len() < MAX_REPORTED {
                    phase.offending.push(Violation {
                        observable: obs.label(),
                        lhs,
                        rhs,
                        rho1: rho1.matrix().clone(),
                        rho2: rho2.matrix().clone(),
                    });
                }
            }
        }
    }
    let counterexample = counterexample_phase(&observables)?;
    let pass = phase.violations == 0 && counterexample.violation_detected;
    Ok(BoundCheckReport {
        seed,
        product_states: phase,
        counterexample,
        pass,
    })
}

fn counterexample_phase(observables: &[Observable; 2]) -> Result<CounterexamplePhase> {
    let psi = counterexample_state().to_density();
    let rho1 = psi.partial_trace(&labels(&["A1", "B1"]))?;
    let rho2 = psi.partial_trace(&labels(&["A2", "B2"]))?;
    let lhs = concurrence(&rho1)? * concurrence(&rho2)?;
    let rhs_v1 = expectation(&observables[0], &psi)?;
    let rhs_v2 = expectation(&observables[1], &psi)?;
    let violation_detected =
        lhs.abs() <= 1e-12 && (rhs_v1 - 4.0).abs() <= 1e-12 && (rhs_v2 - 4.0).abs() <= 1e-12;
    Ok(CounterexamplePhase {
        lhs,
        rhs_v1,
        rhs_v2,
        violation_detected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_run_covers_both_phases() {
        let rep = check_product_bound(1, 0).unwrap();
        assert_eq!(rep.product_states.checks, 2);
        assert!(rep.counterexample.violation_detected);
        assert!(rep.counterexample.lhs.abs() < 1e-12);
        assert!((rep.counterexample.rhs_v1 - 4.0).abs() < 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = check_product_bound(30, 9).unwrap();
        let b = check_product_bound(30, 9).unwrap();
        assert_eq!(a.product_states.max_excess, b.product_states.max_excess);
    }
}
