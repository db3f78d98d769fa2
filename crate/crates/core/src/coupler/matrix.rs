use std::ops::Mul;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A 2×2 complex mode-transformation matrix, row-major.
///
/// Matrices from the ideal device carry `unitary = true`; defect models set it
/// to `false` so downstream code does not assume `M†M = I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix2 {
    pub entries: [[C64; 2]; 2],
    pub unitary: bool,
}

impl TransferMatrix2 {
    pub fn new(entries: [[C64; 2]; 2]) -> Self {
        Self { entries, unitary: true }
    }

    pub fn non_unitary(entries: [[C64; 2]; 2]) -> Self {
        Self { entries, unitary: false }
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self::new([[o, z], [z, o]])
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new([[d0, z], [z, d1]])
    }

    /// Real 2×2 matrix.
    pub fn real(m: [[f64; 2]; 2]) -> Self {
        Self::new([
            [C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)],
            [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)],
        ])
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[r][c]
    }

    pub fn adjoint(&self) -> Self {
        let e = &self.entries;
        Self {
            entries: [[e[0][0].conj(), e[1][0].conj()], [e[0][1].conj(), e[1][1].conj()]],
            unitary: self.unitary,
        }
    }

    pub fn det(&self) -> C64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.entries.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn apply(&self, x: [C64; 2]) -> [C64; 2] {
        let e = &self.entries;
        [e[0][0] * x[0] + e[0][1] * x[1], e[1][0] * x[0] + e[1][1] * x[1]]
    }

    /// Largest entry magnitude of `M†M − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint() * *self;
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g.entries[r][c] - target).norm());
            }
        }
        worst
    }

    /// Largest imaginary-part magnitude over all entries.
    pub fn max_imag(&self) -> f64 {
        self.entries.iter().flatten().map(|x| x.im.abs()).fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        let g = self.adjoint() * *self;
        let t = g.trace().re;
        let d = g.det().re;
        let disc = (t * t - 4.0 * d).max(0.0).sqrt();
        (0.5 * (t + disc)).max(0.0).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.entries[r][c] -= other.entries[r][c];
            }
        }
        out.unitary = false;
        out
    }
}

impl Mul for TransferMatrix2 {
    type Output = TransferMatrix2;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        TransferMatrix2 { entries: m, unitary: self.unitary && rhs.unitary }
    }
}

/// Global phase `e^{iφ}` maximizing `Re tr(e^{-iφ} M₂† M₁)`, i.e. minimizing
/// the Frobenius distance `‖M₁ − e^{iφ}M₂‖_F`.
fn aligning_phase(m1: &TransferMatrix2, m2: &TransferMatrix2) -> C64 {
    let t = (m2.adjoint() * *m1).trace();
    if t.norm() > 0.0 {
        t / t.norm()
    } else {
        C64::new(1.0, 0.0)
    }
}

/// `‖M₁ − e^{iφ}M₂‖₂` (spectral norm) with `φ` the Frobenius-optimal global phase.
///
/// For the near-coincident matrices this is used on, the Frobenius-optimal
/// phase is within second order of the spectral-norm minimizer.
pub fn phase_aligned_distance(m1: &TransferMatrix2, m2: &TransferMatrix2) -> f64 {
    let ph = aligning_phase(m1, m2);
    m1.sub(&m2.scale(ph)).spectral_norm()
}

/// Largest elementwise deviation after global-phase alignment.
pub fn phase_aligned_max_entry(m1: &TransferMatrix2, m2: &TransferMatrix2) -> f64 {
    let ph = aligning_phase(m1, m2);
    let d = m1.sub(&m2.scale(ph));
    d.entries.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
}
