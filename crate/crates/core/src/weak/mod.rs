//! Weak-value reconstruction of a two-mode wavefunction in the
//! optical-momentum domain.
//!
//! For each ray angle `χ` the signal modes are rotated so that mode 0 reads
//! `P₃ = cos χ·P₁ + sin χ·P₂` and mode 1 reads the orthogonal `P₄`. Mode 0 is
//! weakly mixed with a vacuum meter (mixing angle `Γ_w`), `P₃` is read
//! strongly, `|P₄| < w` is postselected and the meter's field strength is
//! averaged. To first order in `Γ_w`, with `[E, P] = i/2`,
//! `E[E_μ | P₃ = p] = −(Γ_w/2)·∂φ/∂p`, so `φ(p) = −(2/Γ_w)∫₀^p E dp′`.

mod phase;
mod scan;
mod value;

pub use phase::{assemble_joint_phase, reconstruct_phase_1d, JointPhaseSurface, SurfaceCell};
pub use scan::{
    default_weak_chi_grid, weak_scan, weak_scan_detailed, weak_scan_sampled, windowed_phase_gradient, ChiScan,
    WeakConfig, WeakScanRecord,
};
pub use value::{weak_couple, weak_value};

use thiserror::Error;

use crate::state::StateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeakError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("invalid weak-measurement configuration: {0}")]
    InvalidConfig(String),
    #[error("postselected state is orthogonal to the input (overlap {overlap:e})")]
    OrthogonalPostselection { overlap: f64 },
    #[error("postselection window holds only {mass:e} of the probability at chi = {chi}")]
    EmptyPostselection { chi: f64, mass: f64 },
    #[error("only {usable} usable rotation angles (need at least 4)")]
    TooFewAngles { usable: usize },
    #[error("state is not reconstructible: the phase origin is masked on every ray")]
    NotReconstructible,
}
