use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::HomodyneError;
use crate::state::FockState;

/// Balanced-homodyne photocurrent moments (proportionality constant 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhdMoments {
    /// `2|α_LO|·⟨E₃⟩`
    pub mean: f64,
    /// `4|α_LO|²·⟨(ΔE₃)²⟩`
    pub variance: f64,
    pub field_mean: f64,
    pub field_variance: f64,
}

/// Moments of the difference photocurrent for the upper output of `R(χ)`
/// mixed with a local oscillator of phase `ψ`.
pub fn bhd_moments(state: &FockState, chi: f64, psi: f64, lo_amplitude: f64) -> Result<BhdMoments, HomodyneError> {
    state.check_normalized()?;
    let rho = state.apply_rotation(chi, 1.0)?.reduced_density(0);
    let d = rho.len();
    let mut a1 = C64::new(0.0, 0.0);
    let mut a2 = C64::new(0.0, 0.0);
    let mut n = 0.0;
    for k in 0..d {
        n += k as f64 * rho[k][k].re;
        if k >= 1 {
            a1 += (k as f64).sqrt() * rho[k][k - 1];
        }
        if k >= 2 {
            a2 += ((k * (k - 1)) as f64).sqrt() * rho[k][k - 2];
        }
    }
    let field_mean = (a1 * C64::cis(-psi)).re;
    let second = (2.0 * (a2 * C64::cis(-2.0 * psi)).re + 2.0 * n + 1.0) / 4.0;
    let field_variance = second - field_mean * field_mean;
    Ok(BhdMoments {
        mean: 2.0 * lo_amplitude * field_mean,
        variance: 4.0 * lo_amplitude * lo_amplitude * field_variance,
        field_mean,
        field_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_shot_noise() {
        let m = bhd_moments(&FockState::vacuum(2, 4), 0.3, 1.1, 5.0).unwrap();
        assert!(m.mean.abs() < 1e-15);
        assert!((m.variance - 25.0).abs() < 1e-12);
    }

    #[test]
    fn circular_coherent_mean() {
        let s = FockState::coherent_product(&[C64::new(4.0, 0.0), C64::new(0.0, 4.0)], 60).unwrap();
        let m = bhd_moments(&s, 0.0, 0.0, 3.0).unwrap();
        assert!((m.mean - 24.0).abs() < 1e-8);
        assert!((m.field_variance - 0.25).abs() < 1e-8);
        // χ = π/2 reads E₂ = Re(4i) = 0, ψ = π/2 then reads P₂ = 4
        let m = bhd_moments(&s, PI / 2.0, PI / 2.0, 1.0).unwrap();
        assert!((m.field_mean - 4.0).abs() < 1e-8);
    }

    #[test]
    fn number_states_are_phase_blind() {
        // fixed total photon number keeps the measured mode diagonal for any χ
        let s = crate::state::noon2();
        for chi in [0.0, 0.4] {
            let v0 = bhd_moments(&s, chi, 0.0, 1.0).unwrap().variance;
            for psi in [0.5, 1.7, 3.0] {
                let v = bhd_moments(&s, chi, psi, 1.0).unwrap().variance;
                assert!((v - v0).abs() < 1e-12);
            }
        }
    }
}
