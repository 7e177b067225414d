//! Complex linear algebra and two-copy quantum primitives.

pub mod concurrence;
pub mod eigen;
pub mod matrix;
pub mod observable;
pub mod state;
pub mod states;

use thiserror::Error;

pub use concurrence::concurrence;
pub use eigen::{hermitian_eigensystem, Eigensystem};
pub use matrix::{ComplexMatrix, Tolerances, TOL};
pub use observable::{
    build_observable, exchange_projectors, expectation, sample_outcome, BornDistribution,
    Observable, ObservableLabel,
};
pub use state::{
    labels, partial_trace, reorder_registers, tensor, DensityMatrix, Ket, Labels, Operand,
};
pub use states::{
    counterexample_state, random_state, schmidt, singlet, werner, GeneratedState, StateKind,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("entry count {0} does not form a square matrix")]
    NotSquare(usize),
    #[error("dimension {0} exceeds the supported maximum")]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{labels} labels cannot index dimension {dim}")]
    LabelCount { labels: usize, dim: usize },
    #[error("duplicate register label {0}")]
    DuplicateLabel(String),
    #[error("register label mismatch: {0}")]
    LabelMismatch(String),
    #[error("operands must both be kets or both be density matrices")]
    MixedOperands,
    #[error("partial trace needs at least one kept register")]
    EmptyKeepSet,
    #[error("not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("squared norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("numerical integrity violated: {0}")]
    NumericalIntegrity(String),
}

pub type Result<T> = std::result::Result<T, QError>;
