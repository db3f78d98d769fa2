use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{phase_aligned_distance, TransferMatrix2};
use crate::numeric::{nelder_mead, NelderMeadOptions};

/// Defective 3 dB coupler, first order in `eps`: `(1/√2)[[1−ε, i(1+ε)], [i(1+ε), 1−ε]]`.
///
/// `M†M = (1 + ε²)·I`, so the unitarity defect is second order.
pub fn defective_3db(eps: f64) -> TransferMatrix2 {
    let d = C64::new((1.0 - eps) * FRAC_1_SQRT_2, 0.0);
    let o = C64::new(0.0, (1.0 + eps) * FRAC_1_SQRT_2);
    TransferMatrix2::non_unitary([[d, o], [o, d]])
}

/// Mach-Zehnder made of two defective 3 dB couplers (`eps1`, `eps2`) around a
/// phase shifter `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectMzi {
    pub eps1: f64,
    pub eps2: f64,
    pub eta: f64,
}

/// Imaginary parts the output phase shifter cannot remove.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MziDiagnostic {
    /// `|ε′ − ε|·|cos η|`
    pub offdiag_imag: f64,
    /// `(ε + ε′)·|sin η|`
    pub diag_imag: f64,
}

impl DefectMzi {
    /// The first-order model is not meant for defects above 0.1.
    pub fn exceeds_first_order(&self) -> bool {
        self.eps1.abs() > 0.1 || self.eps2.abs() > 0.1
    }

    pub fn diagnostic(&self) -> MziDiagnostic {
        MziDiagnostic {
            offdiag_imag: (self.eps2 - self.eps1).abs() * self.eta.cos().abs(),
            diag_imag: (self.eps1 + self.eps2) * self.eta.sin().abs(),
        }
    }
}

/// First-order MZI matrix (global phase dropped).
pub fn defective_mzi(d: &DefectMzi) -> TransferMatrix2 {
    let (s, c) = d.eta.sin_cos();
    let sum = d.eps1 + d.eps2;
    let diff = d.eps2 - d.eps1;
    TransferMatrix2::non_unitary([
        [C64::new(c, sum * s), C64::new(s, diff * c)],
        [C64::new(s, -diff * c), C64::new(-c, sum * s)],
    ])
}

/// Best achievable approximation of a real rotation by a defective MZI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MziFit {
    pub eta: f64,
    pub output_phase: f64,
    pub residual: f64,
}

/// Minimize `‖diag(1, e^{iϕ})·MZI(η) − [[cos χ, sin χ], [−sin χ, cos χ]]‖`
/// (phase-aligned) over the internal phase `η` and the output phase `ϕ`.
pub fn best_mzi_residual(eps1: f64, eps2: f64, chi: f64) -> MziFit {
    let (sc, cc) = chi.sin_cos();
    let target = TransferMatrix2::real([[cc, sc], [-sc, cc]]);
    let cost = |p: &[f64]| -> f64 {
        let m = defective_mzi(&DefectMzi { eps1, eps2, eta: p[0] });
        let out = TransferMatrix2::diag(C64::new(1.0, 0.0), C64::cis(p[1]));
        phase_aligned_distance(&(out * m), &target)
    };

    const N: usize = 720;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..N {
        let eta = 2.0 * PI * i as f64 / N as f64;
        for j in 0..N {
            let ph = 2.0 * PI * j as f64 / N as f64;
            let r = cost(&[eta, ph]);
            if r < best.0 {
                best = (r, eta, ph);
            }
        }
    }
    let opts = NelderMeadOptions { initial_step: 2.0 * PI / N as f64, ..Default::default() };
    let res = nelder_mead(cost, &[best.1, best.2], &opts);
    let (eta, output_phase, residual) = if res.value < best.0 {
        (res.x[0], res.x[1], res.value)
    } else {
        (best.1, best.2, best.0)
    };
    MziFit { eta, output_phase, residual }
}
