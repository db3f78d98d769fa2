use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{CouplerError, CouplerSettings, TransferMatrix2};

/// Default RK4 steps per electrode section.
pub const DEFAULT_STEPS: usize = 2000;

const SELF_CHECK_TOL: f64 = 1e-8;

/// One electrode section: length in m and the sign applied to the mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length: f64,
    pub sign: f64,
}

/// Two coupled guided modes, `da/dz = i·H_s·a` with
/// `H_s = diag(s·β̃₁, s·β̃₂) + K` in a section of sign `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledModeSystem {
    pub betas: [f64; 2],
    pub coupling: [[C64; 2]; 2],
    pub segments: Vec<Segment>,
}

impl CoupledModeSystem {
    /// The reversed-electrode cell: mismatch `−δ` then `+δ`, each section of length `L`.
    ///
    /// Section length `L` (not `L/2`) is what makes the integrated cell match the
    /// closed form, whose argument is `β_r·L`.
    pub fn from_settings(s: &CouplerSettings) -> Self {
        let k = C64::new(s.kappa, 0.0);
        let z = C64::new(0.0, 0.0);
        Self {
            betas: [s.delta, -s.delta],
            coupling: [[z, k], [k, z]],
            segments: vec![
                Segment { length: s.length, sign: -1.0 },
                Segment { length: s.length, sign: 1.0 },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), CouplerError> {
        let c = &self.coupling;
        let herm = (c[0][1] - c[1][0].conj()).norm() < 1e-12
            && c[0][0].im.abs() < 1e-12
            && c[1][1].im.abs() < 1e-12;
        if !herm {
            return Err(CouplerError::InvalidSettings("coupling matrix not Hermitian".into()));
        }
        if self.segments.is_empty() || self.segments.iter().any(|s| !(s.length > 0.0)) {
            return Err(CouplerError::InvalidSettings("segment lengths must be positive".into()));
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    fn hamiltonian(&self, sign: f64) -> [[C64; 2]; 2] {
        let mut h = self.coupling;
        h[0][0] += sign * self.betas[0];
        h[1][1] += sign * self.betas[1];
        h
    }

    fn integrate(&self, input: [C64; 2], steps: usize) -> [C64; 2] {
        let mut a = input;
        for seg in &self.segments {
            let h = self.hamiltonian(seg.sign);
            let rhs = |x: [C64; 2]| -> [C64; 2] {
                let i = C64::i();
                [i * (h[0][0] * x[0] + h[0][1] * x[1]), i * (h[1][0] * x[0] + h[1][1] * x[1])]
            };
            let dz = seg.length / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(a);
                let k2 = rhs([a[0] + k1[0] * (dz / 2.0), a[1] + k1[1] * (dz / 2.0)]);
                let k3 = rhs([a[0] + k2[0] * (dz / 2.0), a[1] + k2[1] * (dz / 2.0)]);
                let k4 = rhs([a[0] + k3[0] * dz, a[1] + k3[1] * dz]);
                for m in 0..2 {
                    a[m] += (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]) * (dz / 6.0);
                }
            }
        }
        a
    }
}

/// Integrate the coupled-mode equations through every section with fixed-step RK4.
///
/// Runs at `steps` and `2·steps` per section and returns the finer result,
/// failing with `StepTooCoarse` if the two differ by more than 1e-8.
pub fn ode_oracle(
    system: &CoupledModeSystem,
    input: [C64; 2],
    steps: usize,
) -> Result<[C64; 2], CouplerError> {
    system.validate()?;
    let coarse = system.integrate(input, steps.max(1));
    let fine = system.integrate(input, 2 * steps.max(1));
    let change = (coarse[0] - fine[0]).norm().max((coarse[1] - fine[1]).norm());
    if change > SELF_CHECK_TOL {
        return Err(CouplerError::StepTooCoarse { change });
    }
    Ok(fine)
}

/// Full device matrix from the oracle, with the phase shifters applied as
/// `diag(1, e^{iφ₁}) · M_ode · diag(1, e^{iφ₂})`.
pub fn ode_transfer_matrix(s: &CouplerSettings, steps: usize) -> Result<TransferMatrix2, CouplerError> {
    s.validate()?;
    let sys = CoupledModeSystem::from_settings(s);
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let c0 = ode_oracle(&sys, [o, z], steps)?;
    let c1 = ode_oracle(&sys, [z, o], steps)?;
    let core = TransferMatrix2::new([[c0[0], c1[0]], [c0[1], c1[1]]]);
    Ok(TransferMatrix2::diag(o, C64::cis(s.phi1)) * core * TransferMatrix2::diag(o, C64::cis(s.phi2)))
}
