//! Monte Carlo balanced-homodyne campaigns over coupler rotation `χ` and
//! local-oscillator phase `ψ`, joint-distribution reconstruction and fitting.
//!
//! The measured mode is the upper output (mode 0) of the rotation
//! `R(χ) = [[cos χ, sin χ], [−sin χ, cos χ]]`, so for a product of coherent
//! states the measured field strength is the projection of `(E₁, E₂)` on the
//! direction `(cos χ, sin χ)`.

mod campaign;
mod chain;
mod config;
mod fit;
mod moments;
mod reconstruct;
mod sampler;

pub use campaign::{phase_averaged_density, run_campaign, CHUNK_SIZE};
pub use chain::{chain_stages, StageSetting};
pub use config::{default_chi_grid, default_psi_grid, HomodyneConfig, HomodyneRecord, Strategy, SAMPLER_GRID_POINTS};
pub use fit::{fit_moments, fit_moments_with, FitModel, FitResult, Optimizer};
pub use moments::{bhd_moments, BhdMoments};
pub use reconstruct::{reconstruct_joint, BinSpec, Histogram2D, ReconMethod, ScatterSign, MIN_PROJECTION_ANGLES};
pub use sampler::PhaseHarmonics;

use thiserror::Error;

use crate::state::StateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomodyneError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("invalid homodyne configuration: {0}")]
    InvalidConfig(String),
    #[error("back-projection needs at least {needed} distinct angles, found {found}")]
    InsufficientAngles { found: usize, needed: usize },
    #[error("fit diverged (relative residual {residual:e})")]
    FitDiverged { residual: f64 },
    #[error("no records")]
    EmptyRecords,
}
