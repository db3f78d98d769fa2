//! Simulation core for a reconfigurable electro-optic directional coupler
//! (two-section reversed-Δβ electrodes plus input/output phase shifters)
//! and the two detection pipelines built on top of it.
//!
//! * [`coupler`]: closed-form transfer matrices, a coupled-mode ODE oracle,
//!   calibration of electrode settings for a target SU(2) rotation and
//!   fabrication-defect models of the Mach-Zehnder alternative.
//! * [`state`]: truncated multimode Fock states, Hermite-Gaussian quadrature
//!   eigenfunctions, mode rotations and quadrature densities.
//! * [`homodyne`]: Monte Carlo balanced-homodyne campaigns, 2-D
//!   reconstruction (scatter emulation and filtered back-projection) and
//!   model fitting.
//! * [`weak`]: weak-value reconstruction of a two-mode wavefunction in the
//!   optical-momentum domain.
//!
//! Quadratures follow `E = (a + a†)/2`, `P = (a − a†)/(2i)`, so that
//! `[E, P] = i/2` and the vacuum variance is 1/4.

pub mod coupler;
pub mod homodyne;
pub mod numeric;
pub mod state;
pub mod weak;

pub use num_complex::Complex64 as C64;
