//! Ensembles of bipartite copies, random pair selection, and Monte Carlo
//! estimation of the mean collective-observable outcome.
//!
//! The joint state of all `N` copies is never materialized. Every supported
//! ensemble has closed-form two-copy marginals that depend only on whether
//! the two copies are good or bad and, for bad copies, whether they share a
//! counterexample block.

use std::collections::BTreeMap;
use std::thread;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::observable::{build_observable, expectation, BornDistribution, ObservableLabel};
use crate::qcore::states::{copy_labels, counterexample_state, pair_labels};
use crate::qcore::{DensityMatrix, QError};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid ensemble: {0}")]
    InvalidModel(String),
    #[error("invalid pair ({0}, {1}) for {2} copies")]
    InvalidPair(usize, usize, usize),
    #[error("invalid protocol config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Quantum(#[from] QError),
}

impl ProtocolError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, ProtocolError::Quantum(QError::NumericalIntegrity(_)))
    }
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Joint state of `N` bipartite copies.
///
/// Bad copies always come in counterexample blocks: bad copies `2b` and
/// `2b + 1` (counted among the bad ones) jointly hold the four-qubit
/// counterexample state, so each bad copy on its own is maximally mixed.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleModel {
    /// `rho0` on every copy, independently.
    Iid { rho0: DensityMatrix, copies: usize },
    /// `blocks` counterexample blocks, `N = 2 * blocks`.
    CounterexampleBlocks { blocks: usize },
    /// `good` independent copies of `rho0` followed by `bad` copies in blocks.
    MixedGoodBad {
        rho0: DensityMatrix,
        good: usize,
        bad: usize,
    },
}

/// Relationship between the two copies of a measured pair; the first copy comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairClass {
    GoodGood,
    GoodBad,
    BadGood,
    /// Two bad copies sharing a counterexample block.
    BlockPartners,
    /// Two bad copies from different blocks.
    BadBad,
}

impl EnsembleModel {
    pub fn copies(&self) -> usize {
        match self {
            EnsembleModel::Iid { copies, .. } => *copies,
            EnsembleModel::CounterexampleBlocks { blocks } => 2 * blocks,
            EnsembleModel::MixedGoodBad { good, bad, .. } => good + bad,
        }
    }

    fn good_copies(&self) -> usize {
        match self {
            EnsembleModel::Iid { copies, .. } => *copies,
            EnsembleModel::CounterexampleBlocks { .. } => 0,
            EnsembleModel::MixedGoodBad { good, .. } => *good,
        }
    }

    fn rho0(&self) -> Option<&DensityMatrix> {
        match self {
            EnsembleModel::Iid { rho0, .. } | EnsembleModel::MixedGoodBad { rho0, .. } => {
                Some(rho0)
            }
            EnsembleModel::CounterexampleBlocks { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.copies() < 2 {
            return Err(ProtocolError::InvalidModel(format!(
                "need at least 2 copies, got {}",
                self.copies()
            )));
        }
        if let Some(rho0) = self.rho0() {
            if rho0.num_qubits() != 2 {
                return Err(ProtocolError::InvalidModel(format!(
                    "single-copy state must be two qubits, got {}",
                    rho0.num_qubits()
                )));
            }
        }
        if let EnsembleModel::MixedGoodBad { bad, .. } = self {
            if bad % 2 != 0 {
                return Err(ProtocolError::InvalidModel(format!(
                    "bad copies come in blocks of two, got {bad}"
                )));
            }
        }
        Ok(())
    }

    /// Classifies the ordered pair of distinct copies `(i, j)` (0-based).
    pub fn classify(&self, i: usize, j: usize) -> Result<PairClass> {
        let n = self.copies();
        if i == j || i >= n || j >= n {
            return Err(ProtocolError::InvalidPair(i, j, n));
        }
        let g = self.good_copies();
        Ok(match (i < g, j < g) {
            (true, true) => PairClass::GoodGood,
            (true, false) => PairClass::GoodBad,
            (false, true) => PairClass::BadGood,
            (false, false) if (i - g) / 2 == (j - g) / 2 => PairClass::BlockPartners,
            (false, false) => PairClass::BadBad,
        })
    }

    /// Number of ordered pairs of distinct copies in each class.
    pub fn class_counts(&self) -> Vec<(PairClass, u64)> {
        let g = self.good_copies() as u64;
        let b = (self.copies() - self.good_copies()) as u64;
        let counts = [
            (PairClass::GoodGood, g * g.saturating_sub(1)),
            (PairClass::GoodBad, g * b),
            (PairClass::BadGood, b * g),
            (PairClass::BlockPartners, b),
            (PairClass::BadBad, b * b.saturating_sub(1) - b),
        ];
        counts.into_iter().filter(|&(_, c)| c > 0).collect()
    }

    /// Exact two-copy state of a class on `[A1, B1, A2, B2]`.
    pub fn class_state(&self, class: PairClass) -> Result<DensityMatrix> {
        let mixed = || DensityMatrix::maximally_mixed(copy_labels(1));
        let good = || {
            self.rho0()
                .ok_or_else(|| ProtocolError::InvalidModel("ensemble has no good copies".into()))
                .and_then(|r| Ok(r.relabeled(copy_labels(1))?))
        };
        let second = |d: DensityMatrix| d.relabeled(copy_labels(2));
        let state = match class {
            PairClass::GoodGood => good()?.tensor(&second(good()?)?)?,
            PairClass::GoodBad => good()?.tensor(&second(mixed()?)?)?,
            PairClass::BadGood => mixed()?.tensor(&second(good()?)?)?,
            PairClass::BlockPartners => counterexample_state().to_density(),
            PairClass::BadBad => mixed()?.tensor(&second(mixed()?)?)?,
        };
        debug_assert_eq!(state.labels(), &pair_labels()[..]);
        Ok(state)
    }
}

/// Exact reduced state of copies `i` and `j` (0-based), labeled
/// `[A{i+1}, B{i+1}, A{j+1}, B{j+1}]`.
pub fn pair_reduced_state(model: &EnsembleModel, i: usize, j: usize) -> Result<DensityMatrix> {
    model.validate()?;
    let class = model.classify(i, j)?;
    let mut lab = copy_labels(i + 1);
    lab.extend(copy_labels(j + 1));
    Ok(model.class_state(class)?.relabeled(lab)?)
}

/// Mean outcome of `label` on a uniformly random ordered pair of distinct copies.
pub fn analytic_mean(model: &EnsembleModel, label: ObservableLabel) -> Result<f64> {
    model.validate()?;
    let obs = build_observable(label);
    let n = model.copies() as f64;
    let mut total = 0.0;
    for (class, count) in model.class_counts() {
        total += count as f64 * expectation(&obs, &model.class_state(class)?)?;
    }
    Ok(total / (n * (n - 1.0)))
}

/// Uniform random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Measure the first two copies of each fresh permutation.
    #[default]
    SinglePairPerRun,
    /// Measure all `N/2` consecutive pairs of each permutation. Each pair is
    /// sampled from its exact reduced state; correlations between different
    /// pairs of the same run (possible when a block is split across two
    /// measured pairs) are not reproduced, which leaves the mean exact.
    DisjointMatching,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub observable: ObservableLabel,
    pub runs: u64,
    pub pairing: Pairing,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(observable: ObservableLabel, runs: u64, seed: u64) -> Self {
        Self {
            observable,
            runs,
            pairing: Pairing::SinglePairPerRun,
            seed,
        }
    }
}

/// Outcome counts indexed like the observable spectrum (-4, 0, +4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutcomeTally {
    pub counts: [u64; 3],
}

const OUTCOME_VALUES: [i32; 3] = [-4, 0, 4];

impl OutcomeTally {
    pub fn merge(&mut self, other: &OutcomeTally) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn summary(&self) -> MeasurementSummary {
        let total = self.total();
        let t = total as f64;
        let mean = if total == 0 {
            0.0
        } else {
            OUTCOME_VALUES
                .iter()
                .zip(self.counts)
                .map(|(&o, c)| o as f64 * c as f64)
                .sum::<f64>()
                / t
        };
        let std_error = if total < 2 {
            f64::INFINITY
        } else {
            let var = OUTCOME_VALUES
                .iter()
                .zip(self.counts)
                .map(|(&o, c)| c as f64 * (o as f64 - mean).powi(2))
                .sum::<f64>()
                / t;
            (var / t).sqrt()
        };
        MeasurementSummary {
            v_m: mean,
            outcome_counts: OUTCOME_VALUES.iter().copied().zip(self.counts).collect(),
            std_error,
            total_pairs_measured: total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementSummary {
    pub v_m: f64,
    pub outcome_counts: BTreeMap<i32, u64>,
    /// Plug-in standard deviation over `sqrt(total_pairs_measured)`; infinite below two outcomes.
    pub std_error: f64,
    pub total_pairs_measured: u64,
}

struct Sampler {
    model: EnsembleModel,
    distributions: BTreeMap<PairClass, BornDistribution>,
}

impl Sampler {
    fn new(model: &EnsembleModel, label: ObservableLabel) -> Result<Self> {
        model.validate()?;
        let obs = build_observable(label);
        let mut distributions = BTreeMap::new();
        for (class, _) in model.class_counts() {
            distributions.insert(
                class,
                BornDistribution::new(&obs, &model.class_state(class)?)?,
            );
        }
        Ok(Self {
            model: model.clone(),
            distributions,
        })
    }

    fn measure<R: Rng + ?Sized>(
        &self,
        i: usize,
        j: usize,
        rng: &mut R,
        tally: &mut OutcomeTally,
    ) -> Result<()> {
        let class = self.model.classify(i, j)?;
        let k = self.distributions[&class].sample_index(rng);
        tally.counts[k] += 1;
        Ok(())
    }

    fn run(&self, runs: u64, pairing: Pairing, seed: u64) -> Result<OutcomeTally> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.model.copies();
        let mut tally = OutcomeTally::default();
        let mut perm: Vec<usize> = (0..n).collect();
        for _ in 0..runs {
            perm.shuffle(&mut rng);
            match pairing {
                Pairing::SinglePairPerRun => {
                    self.measure(perm[0], perm[1], &mut rng, &mut tally)?
                }
                Pairing::DisjointMatching => {
                    for pair in perm.chunks_exact(2) {
                        self.measure(pair[0], pair[1], &mut rng, &mut tally)?;
                    }
                }
            }
        }
        Ok(tally)
    }
}

fn check_config(cfg: &ProtocolConfig) -> Result<()> {
    if cfg.runs == 0 {
        return Err(ProtocolError::InvalidConfig(
            "runs must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Simulates `cfg.runs` rounds of permute-then-measure on `model`.
pub fn run_protocol(model: &EnsembleModel, cfg: &ProtocolConfig) -> Result<MeasurementSummary> {
    check_config(cfg)?;
    let sampler = Sampler::new(model, cfg.observable)?;
    Ok(sampler.run(cfg.runs, cfg.pairing, cfg.seed)?.summary())
}

/// Like [`run_protocol`], split over `workers` threads. Worker `w` draws from
/// the stream seeded with `seed ^ w` and handles a contiguous share of the
/// runs; tallies are summed. One worker reproduces [`run_protocol`] exactly.
pub fn run_protocol_sharded(
    model: &EnsembleModel,
    cfg: &ProtocolConfig,
    workers: usize,
) -> Result<MeasurementSummary> {
    check_config(cfg)?;
    let workers = workers.max(1) as u64;
    let sampler = Sampler::new(model, cfg.observable)?;
    let base = cfg.runs / workers;
    let extra = cfg.runs % workers;
    let tallies: Vec<Result<OutcomeTally>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let runs = base + u64::from(w < extra);
                let sampler = &sampler;
                s.spawn(move || sampler.run(runs, cfg.pairing, cfg.seed ^ w))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("protocol worker panicked"))
            .collect()
    });
    let mut total = OutcomeTally::default();
    for t in tallies {
        total.merge(&t?);
    }
    Ok(total.summary())
}
