use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{CouplerError, TransferMatrix2};

/// Physical and electrical parameters of one reversed-electrode cell.
///
/// Units: `kappa`, `delta` in rad/m, `length` and `wavelength` in m, phases in rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplerSettings {
    pub kappa: f64,
    pub length: f64,
    pub wavelength: f64,
    /// Half the propagation-constant mismatch, Δβ/2.
    pub delta: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl CouplerSettings {
    pub fn new(kappa: f64, length: f64, wavelength: f64) -> Self {
        Self { kappa, length, wavelength, delta: 0.0, phi1: 0.0, phi2: 0.0 }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_phases(mut self, phi1: f64, phi2: f64) -> Self {
        self.phi1 = phi1;
        self.phi2 = phi2;
        self
    }

    /// Vacuum wavenumber 2π/λ.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn validate(&self) -> Result<(), CouplerError> {
        let bad = |what: &str, v: f64| Err(CouplerError::InvalidSettings(format!("{what} = {v}")));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa", self.kappa);
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad("length", self.length);
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return bad("wavelength", self.wavelength);
        }
        if !self.delta.is_finite() {
            return bad("delta", self.delta);
        }
        if !(self.phi1.is_finite() && self.phi2.is_finite()) {
            return bad("phase", if self.phi1.is_finite() { self.phi2 } else { self.phi1 });
        }
        Ok(())
    }
}

/// Closed-form response of a cell: `u`, `v`, `θ` and the derived rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellResponse {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub beta_r: f64,
    pub big_theta: f64,
    pub chi: f64,
}

/// Evaluate `u`, `v`, `θ` with argument `β_r·L`, `β_r = √(κ² + δ²)`.
///
/// `θ = arg(cos x + i(δ/β_r) sin x)` is unwrapped across `x = π/2 + nπ` so it
/// varies continuously with `δ`; at `δ = 0` the `δ → 0⁺` limit is used.
pub fn cell_response(s: &CouplerSettings) -> CellResponse {
    let beta_r = s.kappa.hypot(s.delta);
    let x = beta_r * s.length;
    let (sx, cx) = x.sin_cos();
    let ratio = s.delta / beta_r;
    let u = (cx * cx + ratio * ratio * sx * sx).sqrt();
    let v = s.kappa / beta_r * sx;

    let base = (ratio.abs() * x.tan()).atan() + PI * (x / PI).round();
    let theta = if s.delta < 0.0 { -base } else { base };

    let a_coef = u * u - v * v;
    let b_coef = 2.0 * u * v;
    CellResponse {
        u,
        v,
        theta,
        a_coef,
        b_coef,
        beta_r,
        big_theta: 4.0 * v.atan2(u),
        chi: b_coef.atan2(a_coef),
    }
}

/// Device matrix `[[A, iB e^{i(θ+φ₂)}], [iB e^{-i(θ-φ₁)}, A e^{i(φ₁+φ₂)}]]`.
pub fn transfer_matrix(s: &CouplerSettings) -> TransferMatrix2 {
    let r = cell_response(s);
    let i = C64::i();
    let a = C64::new(r.a_coef, 0.0);
    let b = C64::new(r.b_coef, 0.0);
    TransferMatrix2::new([
        [a, i * b * C64::cis(r.theta + s.phi2)],
        [i * b * C64::cis(-(r.theta - s.phi1)), a * C64::cis(s.phi1 + s.phi2)],
    ])
}

/// Phase-shifter recipe `φ₁ = Φ + θ + π/2 = −φ₂` applied to `s`.
pub(crate) fn su2_phases(theta: f64, big_phi: f64) -> (f64, f64) {
    let phi1 = big_phi + theta + FRAC_PI_2;
    (phi1, -phi1)
}

/// Set `φ₁ = Φ + θ + π/2 = −φ₂` and return `[[A, B e^{-iΦ}], [−B e^{iΦ}, A]]`.
pub fn su2_matrix(s: &CouplerSettings, big_phi: f64) -> TransferMatrix2 {
    let r = cell_response(s);
    su2_target(r.a_coef, r.b_coef, big_phi)
}

/// The SU(2) form `[[A, B e^{-iΦ}], [−B e^{iΦ}, A]]`.
pub fn su2_target(a: f64, b: f64, big_phi: f64) -> TransferMatrix2 {
    let a = C64::new(a, 0.0);
    TransferMatrix2::new([
        [a, b * C64::cis(-big_phi)],
        [-b * C64::cis(big_phi), a],
    ])
}

impl CouplerSettings {
    /// Copy of `self` with `φ₁`, `φ₂` set by the SU(2) recipe for `big_phi`.
    pub fn with_su2_phases(self, big_phi: f64) -> Self {
        let (p1, p2) = su2_phases(cell_response(&self).theta, big_phi);
        self.with_phases(p1, p2)
    }
}
