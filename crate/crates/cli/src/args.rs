use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qcoupler", version, about = "Electro-optic coupler and quantum-optics simulation pipelines")]
pub struct Cli {
    /// `key = value` file; keys are long flag names, flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Primary output file (default: `$QCOUPLER_OUT_DIR/<subcommand>.<ext>`).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// A, B and θ of one cell against δ/k₀ (CSV).
    Sweep(SweepArgs),
    /// Electrode settings for a target rotation (JSON).
    Solve(SolveArgs),
    /// Defective Mach-Zehnder vs recalibrated coupler (JSON).
    Defects(DefectsArgs),
    /// Monte Carlo balanced-homodyne campaign (CSV).
    Homodyne(HomodyneArgs),
    /// Joint density from homodyne records plus a moment fit (CSV + JSON).
    Reconstruct(ReconstructArgs),
    /// Weak-value phase scan and assembled phase surface (CSV + CSV).
    Weak(WeakArgs),
    /// Quadrature densities, joint wavefunctions or the Fock amplitudes of a state.
    State(StateArgs),
}

#[derive(Debug, Args)]
pub struct DeviceArgs {
    /// Coupling constant in units of k₀ = 2π/λ.
    #[arg(long)]
    pub kappa_over_k0: Option<f64>,
    /// Coupling constant in rad/mm (alternative to --kappa-over-k0).
    #[arg(long)]
    pub kappa_per_mm: Option<f64>,
    /// Section length in mm.
    #[arg(long)]
    pub length_mm: Option<f64>,
    #[arg(long)]
    pub wavelength_nm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// First δ/k₀.
    #[arg(long)]
    pub from: Option<f64>,
    /// Last δ/k₀.
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Target rotation Θ = 2χ.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Target phase Φ.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Lower end of the δ search window, rad/mm.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_min_per_mm: Option<f64>,
    /// Upper end of the δ search window, rad/mm.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_max_per_mm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DefectsArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Error of the first 3 dB coupler.
    #[arg(long, allow_hyphen_values = true)]
    pub eps1: Option<f64>,
    /// Error of the second 3 dB coupler.
    #[arg(long, allow_hyphen_values = true)]
    pub eps2: Option<f64>,
    /// Target rotation Θ = 2χ.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StateInput {
    /// State spec: `coherent:a1re,a1im,a2re,a2im`, `noon:N` or `fock-list: n1,n2=re,im; ...`.
    #[arg(long)]
    pub state: Option<String>,
    /// JSON state file (as written by `state --kind json`).
    #[arg(long)]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HomodyneArgs {
    #[command(flatten)]
    pub input: StateInput,
    /// standard | phase-random | full-random
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rotation angles χ_k = 2πk/N on [0, 2π).
    #[arg(long)]
    pub chi_count: Option<usize>,
    /// LO phases ψ_k = 2πk/N on [0, 2π).
    #[arg(long)]
    pub psi_count: Option<usize>,
    #[arg(long)]
    pub lo_amplitude: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Records CSV (`chi,psi,value`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// back-projection | scatter
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Half-width of the square grid (default: from the data).
    #[arg(long)]
    pub half_width: Option<f64>,
    /// ring | gaussian
    #[arg(long)]
    pub model: Option<String>,
    /// levenberg-marquardt | nelder-mead
    #[arg(long)]
    pub optimizer: Option<String>,
}

#[derive(Debug, Args)]
pub struct WeakArgs {
    #[command(flatten)]
    pub input: StateInput,
    #[arg(long)]
    pub gamma_w: Option<f64>,
    /// Angles χ_k = −π/2 + kπ/N, k = 1..N.
    #[arg(long)]
    pub chi_count: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub p_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub p_bins: Option<usize>,
    /// Postselection half-width w.
    #[arg(long)]
    pub window: Option<f64>,
    /// Mask threshold relative to the per-angle peak.
    #[arg(long)]
    pub mask: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Sample this many events per angle instead of exact expectations.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points per axis of the assembled surface on [−r_max, r_max].
    #[arg(long)]
    pub surface_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[command(flatten)]
    pub input: StateInput,
    /// density | joint | json
    #[arg(long)]
    pub kind: Option<String>,
    /// e | p
    #[arg(long)]
    pub axis: Option<String>,
    /// Mode for `--kind density`.
    #[arg(long)]
    pub mode: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}
