//! Control-pulse search for single-qubit frequency estimation.
//!
//! The crate simulates a controlled qubit under Markovian noise, scores
//! control sequences by the quantum Fisher information (QFI) of the final
//! state, and offers two optimizers over pulse sequences: a finite-difference
//! GRAPE ascent and an asynchronous advantage actor-critic (A3C) agent with
//! an optional PPO inner loop.
//!
//! Module map:
//!
//! - [`mat2`] — fixed-size complex linear algebra and the vectorization
//!   convention shared by everything else.
//! - [`dynamics`] — the controlled master equation and joint propagation of
//!   the density matrix with its frequency sensitivity.
//! - [`fisher`] — symmetric logarithmic derivative, QFI, Cramér–Rao bound,
//!   and no-control baselines.
//! - [`grape`] — gradient-ascent pulse engineering over square pulses.
//! - [`neural`] — the policy/value network with hand-rolled reverse-mode
//!   gradients and its optimizers.
//! - [`rl`] — environment semantics: state encoding, rewards, returns,
//!   advantages, the A3C and PPO losses, and rollouts.
//! - [`trainer`] — parallel training orchestration, evaluation, checkpoints.
//! - [`presets`] — the estimation scenarios studied with this tool.

pub mod dynamics;
pub mod fisher;
pub mod grape;
pub mod mat2;
pub mod neural;
pub mod presets;
pub mod rl;
pub mod trainer;

use thiserror::Error;

/// Errors surfaced by the simulation, optimization, and training layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("control amplitude {value} exceeds |u|_max = {max}")]
    AmplitudeBound { value: f64, max: f64 },
    #[error("schedule does not match scenario: {0}")]
    ScheduleMismatch(String),
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("Cramér-Rao bound undefined for non-positive QFI {0}")]
    NonPositiveQfi(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
