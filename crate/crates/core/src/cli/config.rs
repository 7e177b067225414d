//! JSON parameter files and the `simulate` configuration schema.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::protocol::{EnsembleModel, Pairing, ProtocolConfig};
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::observable::ObservableLabel;
use crate::qcore::state::{labels, DensityMatrix};
use crate::qcore::states::{schmidt, singlet, werner};

use super::CliError;

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Optional file overlay; `T::default()` when no file is given.
pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    path.map_or_else(|| Ok(T::default()), load_json)
}

/// A single-copy state: a name or an explicit 4x4 matrix of `[re, im]` pairs.
///
/// Names: `singlet`, `maximally_mixed`, `werner:<p>`, `schmidt:<theta>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl StateSpec {
    pub fn resolve(&self) -> Result<DensityMatrix, CliError> {
        let lab = labels(&["A", "B"]);
        let bad = |msg: String| CliError::Config(msg);
        match self {
            StateSpec::Named(name) => {
                let (head, arg) = match name.split_once(':') {
                    Some((h, a)) => (h, Some(a)),
                    None => (name.as_str(), None),
                };
                let param = || -> Result<f64, CliError> {
                    arg.ok_or_else(|| bad(format!("state {name:?} needs a parameter")))?
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| bad(format!("state {name:?}: {e}")))
                };
                match (head.trim().to_ascii_lowercase().as_str(), arg) {
                    ("singlet", None) => Ok(singlet(lab).to_density()),
                    ("maximally_mixed", None) => Ok(DensityMatrix::maximally_mixed(lab)?),
                    ("werner", Some(_)) => Ok(werner(param()?, lab)?),
                    ("schmidt", Some(_)) => Ok(schmidt(param()?, lab)?.to_density()),
                    _ => Err(bad(format!("unknown state {name:?}"))),
                }
            }
            StateSpec::Matrix(rows) => {
                let m = ComplexMatrix::from_pair_rows(rows)?;
                Ok(DensityMatrix::new(m, lab)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Iid,
    Counterexample,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<StateSpec>,
    #[serde(rename = "N")]
    pub copies: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_bad: Option<u64>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<EnsembleModel, CliError> {
        let copies =
            usize::try_from(self.copies).map_err(|_| CliError::Config("N too large".into()))?;
        let rho0 = || {
            self.rho0
                .as_ref()
                .ok_or_else(|| CliError::Config("model needs \"rho0\"".into()))?
                .resolve()
        };
        let model = match self.kind {
            ModelKind::Iid => EnsembleModel::Iid {
                rho0: rho0()?,
                copies,
            },
            ModelKind::Counterexample => {
                if copies % 2 != 0 {
                    return Err(CliError::Config(format!(
                        "counterexample needs even N, got {copies}"
                    )));
                }
                EnsembleModel::CounterexampleBlocks { blocks: copies / 2 }
            }
            ModelKind::Mixed => {
                let bad = self
                    .r_bad
                    .ok_or_else(|| CliError::Config("mixed model needs \"r_bad\"".into()))?
                    as usize;
                if bad > copies {
                    return Err(CliError::Config(format!(
                        "r_bad = {bad} exceeds N = {copies}"
                    )));
                }
                EnsembleModel::MixedGoodBad {
                    rho0: rho0()?,
                    good: copies - bad,
                    bad,
                }
            }
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PairingName {
    #[default]
    Single,
    Matching,
}

impl From<PairingName> for Pairing {
    fn from(p: PairingName) -> Self {
        match p {
            PairingName::Single => Pairing::SinglePairPerRun,
            PairingName::Matching => Pairing::DisjointMatching,
        }
    }
}

impl std::str::FromStr for PairingName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "single" => Ok(PairingName::Single),
            "matching" => Ok(PairingName::Matching),
            _ => Err(format!(
                "unknown pairing {s:?} (expected single or matching)"
            )),
        }
    }
}

/// Contents of a `simulate` config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelSpec,
    #[serde(default = "default_observable")]
    pub observable: ObservableLabel,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub pairing: PairingName,
    #[serde(default)]
    pub seed: u64,
}

fn default_observable() -> ObservableLabel {
    ObservableLabel::V1
}

fn default_runs() -> u64 {
    100_000
}

impl SimulateConfig {
    pub fn protocol_config(&self) -> ProtocolConfig {
        ProtocolConfig {
            observable: self.observable,
            runs: self.runs,
            pairing: self.pairing.into(),
            seed: self.seed,
        }
    }
}
