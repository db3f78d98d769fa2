//! Truncated multimode Fock states and their quadrature representations.
//!
//! Single-mode eigenfunctions are Hermite-Gaussians normalized so that the
//! vacuum has `⟨E²⟩ = 1/4`; the `P`-axis eigenfunction of `|n⟩` is `(−i)ⁿψₙ(p)`,
//! which makes `⟨P⟩ = Im α` for a coherent state and relates the two axes by
//! `Φ(p) = π^{-1/2} ∫ Ψ(x) e^{−2ipx} dx`.

mod fock;
mod hermite;
mod quadrature;

pub use fock::{
    coherent_cutoff, coherent_state, noon, noon2, FockState, LEAKAGE_TOL, NOON_CUTOFF,
};
pub use hermite::{hermite_psi, hermite_table, hermite_table_grid};
pub use quadrature::{
    eigenfunctions, joint_wavefunction, mode_wavefunction, quadrature_density, uniform_grid, Axis,
    FieldValues, QuadratureField, MASS_TOL,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("truncation overflow: {leakage:e} of the norm left the Fock cutoff")]
    TruncationOverflow { leakage: f64 },
    #[error("grid too narrow: it holds {mass} of the probability mass")]
    GridTooNarrow { mass: f64 },
    #[error("state norm is {norm}, expected 1")]
    NormalizationError { norm: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
}
