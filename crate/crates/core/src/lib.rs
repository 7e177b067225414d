//! Simulation and analysis of permutation-symmetrized direct measurements
//! of two-qubit entanglement.
//!
//! - [`qcore`]: complex linear algebra, the collective observables `V1`/`V2`,
//!   Born sampling and Wootters concurrence.
//! - [`protocol`]: ensembles of copies, random pair selection and Monte Carlo
//!   estimation of the mean outcome.
//! - [`estimator`]: certified concurrence lower bounds and state-assignment
//!   error bounds, plus the parameter sweeps built on them.
//! - [`cli`]: the `dment` command-line front end.

pub mod cli;
pub mod estimator;
pub mod protocol;
pub mod qcore;
