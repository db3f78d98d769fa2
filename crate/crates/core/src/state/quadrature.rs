use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{hermite_table_grid, FockState, StateError};
use crate::numeric::{linspace, trapezoid, trapezoid_2d};

/// Allowed deviation of the on-grid probability mass from 1.
pub const MASS_TOL: f64 = 1e-6;

/// Which quadrature a field is sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Field strength `E = (a + a†)/2`.
    E,
    /// Optical momentum `P = (a − a†)/(2i)`.
    P,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::E => "e",
            Axis::P => "p",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldValues {
    Density(Vec<f64>),
    Wavefunction(Vec<C64>),
}

/// A density or wavefunction sampled on a 1-D grid `x` or a 2-D grid `x × y`
/// (row-major, `x` slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureField {
    pub axis: Axis,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub values: FieldValues,
}

impl QuadratureField {
    pub fn density(&self) -> Option<&[f64]> {
        match &self.values {
            FieldValues::Density(d) => Some(d),
            FieldValues::Wavefunction(_) => None,
        }
    }

    pub fn wavefunction(&self) -> Option<&[C64]> {
        match &self.values {
            FieldValues::Wavefunction(w) => Some(w),
            FieldValues::Density(_) => None,
        }
    }

    /// `|Ψ|` for wavefunctions, `√P` for densities.
    pub fn amplitude(&self) -> Vec<f64> {
        match &self.values {
            FieldValues::Wavefunction(w) => w.iter().map(|z| z.norm()).collect(),
            FieldValues::Density(d) => d.iter().map(|p| p.max(0.0).sqrt()).collect(),
        }
    }

    /// `arg Ψ` (zero for densities).
    pub fn phase(&self) -> Vec<f64> {
        match &self.values {
            FieldValues::Wavefunction(w) => w.iter().map(|z| z.arg()).collect(),
            FieldValues::Density(d) => vec![0.0; d.len()],
        }
    }

    /// Probability values: `P` or `|Ψ|²`.
    pub fn probability(&self) -> Vec<f64> {
        match &self.values {
            FieldValues::Wavefunction(w) => w.iter().map(|z| z.norm_sqr()).collect(),
            FieldValues::Density(d) => d.clone(),
        }
    }

    /// Trapezoidal integral of the probability over the grid.
    pub fn mass(&self) -> f64 {
        let p = self.probability();
        match &self.y {
            None => trapezoid(&self.x, &p),
            Some(y) => trapezoid_2d(&self.x, y, &p),
        }
    }
}

/// `n` evenly spaced points on `[−half_width, half_width]`.
pub fn uniform_grid(half_width: f64, n: usize) -> Vec<f64> {
    linspace(-half_width, half_width, n)
}

/// Eigenfunctions `⟨x|n⟩` for `n ≤ nmax`, indexed `[n][i]`: `ψₙ` on the `E` axis,
/// `(−i)ⁿψₙ` on the `P` axis.
pub fn eigenfunctions(axis: Axis, nmax: usize, xs: &[f64]) -> Vec<Vec<C64>> {
    let tab = hermite_table_grid(nmax, xs);
    tab.into_iter()
        .enumerate()
        .map(|(n, row)| {
            let ph = match axis {
                Axis::E => C64::new(1.0, 0.0),
                Axis::P => C64::new(0.0, -1.0).powu(n as u32),
            };
            row.into_iter().map(|v| ph * v).collect()
        })
        .collect()
}

/// Wavefunction of a single-mode amplitude vector on `xs`.
pub fn mode_wavefunction(amps: &[C64], axis: Axis, xs: &[f64]) -> Vec<C64> {
    if amps.is_empty() {
        return vec![C64::new(0.0, 0.0); xs.len()];
    }
    let phi = eigenfunctions(axis, amps.len() - 1, xs);
    (0..xs.len()).map(|i| amps.iter().zip(&phi).map(|(c, f)| c * f[i]).sum()).collect()
}

/// Marginal density of one mode on `xs`, `P(x) = Σ ρ_mn ⟨x|m⟩⟨n|x⟩`, normalized.
///
/// Fails with `GridTooNarrow` if the grid holds less than `1 − 1e-6` of the mass.
pub fn quadrature_density(state: &FockState, mode: usize, axis: Axis, xs: &[f64]) -> Result<QuadratureField, StateError> {
    if mode >= state.modes() {
        return Err(StateError::InvalidState(format!("mode {mode} of {}", state.modes())));
    }
    let rho = state.reduced_density(mode);
    let d = state.dim();
    let active: Vec<usize> = (0..d).filter(|&n| rho[n][n].re > 0.0).collect();
    let phi = eigenfunctions(axis, d - 1, xs);
    let mut dens = vec![0.0; xs.len()];
    for (i, p) in dens.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &m in &active {
            let mut w = C64::new(0.0, 0.0);
            for &n in &active {
                w += rho[m][n] * phi[n][i].conj();
            }
            acc += (phi[m][i] * w).re;
        }
        *p = acc.max(0.0);
    }
    let mass = trapezoid(xs, &dens);
    if !((mass - 1.0).abs() <= MASS_TOL) {
        return Err(StateError::GridTooNarrow { mass });
    }
    dens.iter_mut().for_each(|p| *p /= mass);
    Ok(QuadratureField { axis, x: xs.to_vec(), y: None, values: FieldValues::Density(dens) })
}

/// Two-mode wavefunction `Ψ(x₁,x₂) = Σ c[n₁][n₂] ⟨x₁|n₁⟩⟨x₂|n₂⟩` on `x1 × x2`.
///
/// The global phase is fixed so that `arg Ψ = 0` at the grid point nearest the
/// origin; the result is normalized to unit trapezoidal mass.
pub fn joint_wavefunction(state: &FockState, x1: &[f64], x2: &[f64], axis: Axis) -> Result<QuadratureField, StateError> {
    if state.modes() != 2 {
        return Err(StateError::InvalidState(format!("joint wavefunction needs 2 modes, got {}", state.modes())));
    }
    let d = state.dim();
    let f1 = eigenfunctions(axis, d - 1, x1);
    let f2 = eigenfunctions(axis, d - 1, x2);
    let c = state.amplitudes();
    // t[n1][j] = Σ_{n2} c[n1][n2] f2[n2][j]
    let mut t = vec![vec![C64::new(0.0, 0.0); x2.len()]; d];
    for n1 in 0..d {
        for n2 in 0..d {
            let a = c[n1 * d + n2];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (tj, fj) in t[n1].iter_mut().zip(&f2[n2]) {
                *tj += a * fj;
            }
        }
    }
    let mut psi = vec![C64::new(0.0, 0.0); x1.len() * x2.len()];
    for n1 in 0..d {
        if t[n1].iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        for i in 0..x1.len() {
            let f = f1[n1][i];
            let row = &mut psi[i * x2.len()..(i + 1) * x2.len()];
            for (p, tj) in row.iter_mut().zip(&t[n1]) {
                *p += f * tj;
            }
        }
    }
    let prob: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let mass = trapezoid_2d(x1, x2, &prob);
    if !((mass - 1.0).abs() <= MASS_TOL) {
        return Err(StateError::GridTooNarrow { mass });
    }
    let nearest = |xs: &[f64]| {
        (0..xs.len()).min_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs())).unwrap_or(0)
    };
    let origin = psi[nearest(x1) * x2.len() + nearest(x2)];
    let fix = if origin.norm() > 0.0 { origin.conj() / origin.norm() } else { C64::new(1.0, 0.0) };
    let scale = fix / mass.sqrt();
    psi.iter_mut().for_each(|z| *z *= scale);
    Ok(QuadratureField { axis, x: x1.to_vec(), y: Some(x2.to_vec()), values: FieldValues::Wavefunction(psi) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{coherent_state, noon2, NOON_CUTOFF};
    use std::f64::consts::PI;

    fn moments(f: &QuadratureField) -> (f64, f64) {
        let p = f.density().unwrap();
        let xp: Vec<f64> = f.x.iter().zip(p).map(|(x, p)| x * p).collect();
        let mean = trapezoid(&f.x, &xp);
        let x2p: Vec<f64> = f.x.iter().zip(p).map(|(x, p)| (x - mean).powi(2) * p).collect();
        (mean, trapezoid(&f.x, &x2p))
    }

    #[test]
    fn vacuum_variance_is_a_quarter() {
        let s = FockState::vacuum(2, 4);
        let f = quadrature_density(&s, 0, Axis::E, &uniform_grid(6.0, 1201)).unwrap();
        let (m, v) = moments(&f);
        assert!(m.abs() < 1e-12);
        assert!((v - 0.25).abs() < 1e-10);
    }

    #[test]
    fn coherent_moments_on_both_axes() {
        let a = C64::new(1.3, -0.7);
        let s = FockState::product(&[coherent_state(a, 40).unwrap(), coherent_state(C64::new(0.0, 0.0), 40).unwrap()]).unwrap();
        let xs = uniform_grid(8.0, 1601);
        let (m, v) = moments(&quadrature_density(&s, 0, Axis::E, &xs).unwrap());
        assert!((m - a.re).abs() < 1e-8 && (v - 0.25).abs() < 1e-6);
        let (m, v) = moments(&quadrature_density(&s, 0, Axis::P, &xs).unwrap());
        assert!((m - a.im).abs() < 1e-8 && (v - 0.25).abs() < 1e-6);
    }

    #[test]
    fn noon_momentum_marginal() {
        let xs = uniform_grid(6.0, 601);
        let f = quadrature_density(&noon2(), 0, Axis::P, &xs).unwrap();
        let p = f.density().unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let want = 0.5 * (crate::state::hermite_psi(0, x).powi(2) + crate::state::hermite_psi(2, x).powi(2));
            assert!((p[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let err = quadrature_density(&noon2(), 0, Axis::E, &uniform_grid(1.0, 101)).unwrap_err();
        assert!(matches!(err, StateError::GridTooNarrow { .. }));
    }

    #[test]
    fn joint_vacuum_is_real_gaussian() {
        let xs = uniform_grid(4.0, 161);
        let f = joint_wavefunction(&FockState::vacuum(2, 3), &xs, &xs, Axis::P).unwrap();
        assert!(f.phase().iter().all(|p| p.abs() < 1e-14));
        assert!((f.mass() - 1.0).abs() < 1e-12);
        let w = f.wavefunction().unwrap();
        let g = (2.0 / PI).sqrt() * (-2.0 * 1.0f64).exp();
        // (1, 1) is grid point (100, 100)
        assert!((w[100 * 161 + 100].re - g).abs() < 1e-12);
    }

    #[test]
    fn joint_noon_phase_jumps_on_diagonals() {
        // Ψ_P ∝ g(p1)g(p2)[(4p1² − 1) + i(4p2² − 1)] vanishes at (±½, ±½)
        let xs = uniform_grid(4.0, 161);
        let f = joint_wavefunction(&noon2(), &xs, &xs, Axis::P).unwrap();
        let amp = f.amplitude();
        let at = |p1: f64, p2: f64| {
            let i = ((p1 + 4.0) / 0.05).round() as usize;
            let j = ((p2 + 4.0) / 0.05).round() as usize;
            amp[i * 161 + j]
        };
        for (a, b) in [(0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (-0.5, -0.5)] {
            assert!(at(a, b) < 1e-12, "{a},{b}");
        }
        assert!(at(0.5, 0.0) > 0.1);
        assert_eq!(NOON_CUTOFF, 12);
    }
}
