//! Reversed-Δβ directional coupler: closed-form response, coupled-mode
//! oracle, calibration and the defective Mach-Zehnder comparison.

mod calibrate;
mod defects;
mod matrix;
mod ode;
mod settings;
mod sweep;

pub use calibrate::{default_delta_window, solve_settings, DELTA_PRESCAN_POINTS};
pub use defects::{
    best_mzi_residual, defective_3db, defective_mzi, DefectMzi, MziDiagnostic, MziFit,
};
pub use matrix::{phase_aligned_distance, phase_aligned_max_entry, TransferMatrix2};
pub use ode::{ode_oracle, ode_transfer_matrix, CoupledModeSystem, Segment, DEFAULT_STEPS};
pub use settings::{cell_response, su2_matrix, su2_target, transfer_matrix, CellResponse, CouplerSettings};
pub use sweep::{sweep, SweepRow, SWEEP_HEADER};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplerError {
    #[error("invalid coupler settings: {0}")]
    InvalidSettings(String),
    #[error("target chi = {target} rad is not attained for delta in [{lo}, {hi}] rad/m (chi spans [{chi_min}, {chi_max}])")]
    TargetUnreachable {
        target: f64,
        lo: f64,
        hi: f64,
        chi_min: f64,
        chi_max: f64,
    },
    #[error("chi(delta) reverses direction near delta = {at} rad/m; narrow the window")]
    NonMonotoneWindow { at: f64 },
    #[error("integration step too coarse: halving the step moved the output by {change:e}")]
    StepTooCoarse { change: f64 },
}
