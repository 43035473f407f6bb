//! Time evolution and steady states of the Lindblad equation.

pub mod evolve;
pub mod steady;

use thiserror::Error;

use crate::model::ModelError;
use crate::quantum::QuantumError;

pub use evolve::{
    evolve, evolve_schedule, EvolveOptions, EvolveResult, Generator, LeakGuard, Schedule, Series, StateStorage,
    StepControl, StepStats,
};
pub use steady::{steady_state, steady_state_by_evolution, SteadyStateResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("step size underflow at t = {t:.6e} s (dt = {dt:.3e} s)")]
    StepUnderflow { t: f64, dt: f64 },
    #[error("step budget of {0} steps exhausted")]
    MaxSteps(usize),
    #[error(
        "truncation leak {leak:.3e} in the top two mechanical levels at t = {t:.6e} s \
         exceeds {limit:.1e}; raise the mechanical cutoff (N_M = {n_m}, try {suggested})"
    )]
    TruncationLeak {
        leak: f64,
        t: f64,
        limit: f64,
        n_m: usize,
        suggested: usize,
    },
    #[error("steady-state system is singular: {0}; perturb the parameters (e.g. a small bath rate)")]
    Singular(String),
    #[error("steady state has eigenvalue {min_eig:.3e} below the clipping tolerance")]
    Negativity { min_eig: f64 },
    #[error("no steady state within horizon {horizon:.3e} s (last change {last_change:.3e})")]
    NotConverged { horizon: f64, last_change: f64 },
}

impl SolverError {
    /// True for failures that signal an inadequate truncation or an
    /// unphysical state rather than a numerical breakdown.
    pub fn is_physics_diagnostic(&self) -> bool {
        matches!(
            self,
            SolverError::TruncationLeak { .. } | SolverError::Negativity { .. }
        )
    }
}
