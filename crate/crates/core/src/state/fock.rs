use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::StateError;

/// Largest norm an operation may lose to the cutoff before it fails.
pub const LEAKAGE_TOL: f64 = 1e-6;

/// Default cutoff for NOON experiments (the state plus meter headroom).
pub const NOON_CUTOFF: usize = 12;

const NORM_TOL: f64 = 1e-9;

/// Pure state of `modes` bosonic modes, each truncated at `cutoff` photons.
///
/// Amplitudes are stored flat, row-major over `(n₁, …, n_modes)` with the
/// first mode varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFockState")]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    amplitudes: Vec<C64>,
}

#[derive(Deserialize)]
struct RawFockState {
    modes: usize,
    cutoff: usize,
    amplitudes: Vec<C64>,
}

impl TryFrom<RawFockState> for FockState {
    type Error = StateError;

    fn try_from(r: RawFockState) -> Result<Self, StateError> {
        let s = FockState::from_amplitudes(r.modes, r.cutoff, r.amplitudes)?;
        s.check_normalized()?;
        Ok(s)
    }
}

/// `e^{−|α|²/2} αⁿ/√(n!)` for `n = 0..=cutoff`.
///
/// Fails with `TruncationOverflow` if more than 1e-9 of the norm lies above the cutoff.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<Vec<C64>, StateError> {
    let mut c = Vec::with_capacity(cutoff + 1);
    c.push(C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0));
    for n in 1..=cutoff {
        let prev = c[n - 1];
        c.push(prev * alpha / (n as f64).sqrt());
    }
    let kept: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    let tail = 1.0 - kept;
    if tail > 1e-9 {
        return Err(StateError::TruncationOverflow { leakage: tail });
    }
    Ok(c)
}

/// Cutoff used for coherent inputs of largest amplitude `a`: `max(12, ⌈a² + 8a⌉ + 12)`.
pub fn coherent_cutoff(a: f64) -> usize {
    ((a * a + 8.0 * a).ceil() as usize + 12).max(12)
}

/// `(|n,0⟩ + i|0,n⟩)/√2` at the given cutoff.
pub fn noon(n: usize, cutoff: usize) -> Result<FockState, StateError> {
    if n == 0 || n > cutoff {
        return Err(StateError::InvalidState(format!("NOON order {n} with cutoff {cutoff}")));
    }
    let mut s = FockState::vacuum(2, cutoff);
    s.amplitudes[0] = C64::new(0.0, 0.0);
    s.set(&[n, 0], C64::new(FRAC_1_SQRT_2, 0.0));
    s.set(&[0, n], C64::new(0.0, FRAC_1_SQRT_2));
    Ok(s)
}

/// `(|2,0⟩ + i|0,2⟩)/√2` at [`NOON_CUTOFF`].
pub fn noon2() -> FockState {
    noon(2, NOON_CUTOFF).expect("order 2 fits the default cutoff")
}

impl FockState {
    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        let len = (cutoff + 1).pow(modes as u32);
        let mut amplitudes = vec![C64::new(0.0, 0.0); len];
        amplitudes[0] = C64::new(1.0, 0.0);
        Self { modes, cutoff, amplitudes }
    }

    /// Wrap raw amplitudes; only the length is checked.
    pub fn from_amplitudes(modes: usize, cutoff: usize, amplitudes: Vec<C64>) -> Result<Self, StateError> {
        if modes == 0 {
            return Err(StateError::InvalidState("zero modes".into()));
        }
        let len = (cutoff + 1).pow(modes as u32);
        if amplitudes.len() != len {
            return Err(StateError::InvalidState(format!(
                "expected {len} amplitudes for {modes} modes at cutoff {cutoff}, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(StateError::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self { modes, cutoff, amplitudes })
    }

    /// Tensor product of single-mode amplitude vectors (each of length `cutoff + 1`).
    pub fn product(factors: &[Vec<C64>]) -> Result<Self, StateError> {
        let Some(first) = factors.first() else {
            return Err(StateError::InvalidState("no factors".into()));
        };
        let d = first.len();
        if d == 0 || factors.iter().any(|f| f.len() != d) {
            return Err(StateError::InvalidState("factors must share one cutoff".into()));
        }
        let mut amps = vec![C64::new(1.0, 0.0)];
        for f in factors {
            amps = amps.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
        }
        Self::from_amplitudes(factors.len(), d - 1, amps)
    }

    /// Product of coherent states `|α₁⟩|α₂⟩…`.
    pub fn coherent_product(alphas: &[C64], cutoff: usize) -> Result<Self, StateError> {
        let f: Result<Vec<_>, _> = alphas.iter().map(|&a| coherent_state(a, cutoff)).collect();
        Self::product(&f?)
    }

    /// Sparse construction from `(occupations, amplitude)` pairs, normalized within 1e-6.
    pub fn from_fock_list(modes: usize, cutoff: usize, entries: &[(Vec<usize>, C64)]) -> Result<Self, StateError> {
        let mut s = Self::vacuum(modes, cutoff);
        s.amplitudes[0] = C64::new(0.0, 0.0);
        for (occ, amp) in entries {
            if occ.len() != modes || occ.iter().any(|&n| n > cutoff) {
                return Err(StateError::InvalidState(format!("occupation {occ:?} outside {modes} modes / cutoff {cutoff}")));
            }
            let i = s.index(occ);
            s.amplitudes[i] += amp;
        }
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(StateError::NormalizationError { norm });
        }
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Per-mode dimension, `cutoff + 1`.
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.dim().pow((self.modes - 1 - mode) as u32)
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().fold(0, |acc, &n| acc * self.dim() + n)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let d = self.dim();
        let mut occ = vec![0; self.modes];
        for m in (0..self.modes).rev() {
            occ[m] = index % d;
            index /= d;
        }
        occ
    }

    pub fn get(&self, occ: &[usize]) -> C64 {
        self.amplitudes[self.index(occ)]
    }

    pub fn set(&mut self, occ: &[usize], v: C64) {
        let i = self.index(occ);
        self.amplitudes[i] = v;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<(), StateError> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::NormalizationError { norm });
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self, StateError> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(StateError::NormalizationError { norm: 0.0 });
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!((self.modes, self.cutoff), (other.modes, other.cutoff), "shape mismatch");
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Same state with a different cutoff; lowering it may drop norm and then fails.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self, StateError> {
        let mut out = Self::vacuum(self.modes, cutoff);
        out.amplitudes[0] = C64::new(0.0, 0.0);
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let occ = self.occupations(i);
            if occ.iter().all(|&n| n <= cutoff) {
                let j = out.index(&occ);
                out.amplitudes[j] = a;
            }
        }
        let leakage = self.norm_sqr() - out.norm_sqr();
        if leakage > LEAKAGE_TOL {
            return Err(StateError::TruncationOverflow { leakage });
        }
        Ok(out)
    }

    /// Append a mode in the vacuum (as the last, fastest-varying mode).
    pub fn with_vacuum_mode(&self) -> Self {
        let d = self.dim();
        let mut amplitudes = vec![C64::new(0.0, 0.0); self.amplitudes.len() * d];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            amplitudes[i * d] = a;
        }
        Self { modes: self.modes + 1, cutoff: self.cutoff, amplitudes }
    }

    /// Apply the linear-optics unitary with `U a_k† U† = Σ_j r[j][k] a_j†` on modes
    /// `(j, k)` (slot 0 → mode `j`, slot 1 → mode `k`).
    ///
    /// Every photon-number block is transformed exactly; components pushed
    /// above the cutoff are dropped and counted as leakage.
    pub fn apply_mode_unitary(&self, j: usize, k: usize, r: [[C64; 2]; 2]) -> Result<Self, StateError> {
        if j >= self.modes || k >= self.modes || j == k {
            return Err(StateError::InvalidState(format!("mode pair ({j}, {k}) on {} modes", self.modes)));
        }
        let c = self.cutoff;
        let d = self.dim();
        // table[a*d + b][m] = ⟨m, a+b−m| U |a, b⟩
        let mut table: Vec<Vec<C64>> = vec![Vec::new(); d * d];
        table[0] = vec![C64::new(1.0, 0.0)];
        let create = |w: &[C64], slot: usize| -> Vec<C64> {
            // Σ_j r[j][slot] a_j† on a vector over total T−1, indexed by slot-0 occupation
            let t1 = w.len() - 1;
            let mut out = vec![C64::new(0.0, 0.0); w.len() + 1];
            for (m, &x) in w.iter().enumerate() {
                out[m + 1] += r[0][slot] * ((m + 1) as f64).sqrt() * x;
                out[m] += r[1][slot] * ((t1 - m + 1) as f64).sqrt() * x;
            }
            out
        };
        for a in 0..d {
            for b in 0..d {
                if a == 0 && b == 0 {
                    continue;
                }
                let v = if a > 0 {
                    let w = create(&table[(a - 1) * d + b], 0);
                    w.into_iter().map(|x| x / (a as f64).sqrt()).collect()
                } else {
                    let w = create(&table[b - 1], 1);
                    w.into_iter().map(|x| x / (b as f64).sqrt()).collect()
                };
                table[a * d + b] = v;
            }
        }

        let (sj, sk) = (self.stride(j), self.stride(k));
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        for (i, &amp) in self.amplitudes.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let a = (i / sj) % d;
            let b = (i / sk) % d;
            let base = i - a * sj - b * sk;
            let total = a + b;
            for (m, &u) in table[a * d + b].iter().enumerate() {
                let n2 = total - m;
                if m <= c && n2 <= c {
                    out[base + m * sj + n2 * sk] += u * amp;
                }
            }
        }
        let res = Self { modes: self.modes, cutoff: c, amplitudes: out };
        let leakage = self.norm_sqr() - res.norm_sqr();
        if leakage > LEAKAGE_TOL {
            return Err(StateError::TruncationOverflow { leakage });
        }
        Ok(res)
    }

    /// Real rotation `R = [[cos χ, σ sin χ], [−σ sin χ, cos χ]]` on modes `(j, k)`;
    /// coherent amplitudes map as `α → R·α`.
    pub fn rotate_modes(&self, j: usize, k: usize, chi: f64, sign: f64) -> Result<Self, StateError> {
        let (s, c) = chi.sin_cos();
        let s = sign.signum() * s;
        let r = [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]];
        self.apply_mode_unitary(j, k, r)
    }

    /// Rotation of the first two modes; see [`FockState::rotate_modes`].
    pub fn apply_rotation(&self, chi: f64, sign: f64) -> Result<Self, StateError> {
        self.rotate_modes(0, 1, chi, sign)
    }

    /// Multiply amplitudes by `e^{−iψn}` with `n` the occupation of `mode`.
    pub fn apply_lo_phase(&self, psi: f64, mode: usize) -> Self {
        let d = self.dim();
        let st = self.stride(mode);
        let phases: Vec<C64> = (0..d).map(|n| C64::cis(-psi * n as f64)).collect();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| a * phases[(i / st) % d])
            .collect();
        Self { modes: self.modes, cutoff: self.cutoff, amplitudes }
    }

    /// Reduced density matrix `ρ_mn = Σ_rest c[m, rest] c*[n, rest]` of one mode.
    pub fn reduced_density(&self, mode: usize) -> Vec<Vec<C64>> {
        let d = self.dim();
        let st = self.stride(mode);
        let mut rho = vec![vec![C64::new(0.0, 0.0); d]; d];
        for i in 0..self.amplitudes.len() {
            // visit each rest-index once, with this mode empty
            if (i / st) % d != 0 {
                continue;
            }
            for p in 0..d {
                let x = self.amplitudes[i + p * st];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for q in 0..d {
                    rho[p][q] += x * self.amplitudes[i + q * st].conj();
                }
            }
        }
        rho
    }

    /// Photon-number distribution of one mode.
    pub fn number_distribution(&self, mode: usize) -> Vec<f64> {
        self.reduced_density(mode).iter().enumerate().map(|(n, row)| row[n].re).collect()
    }

    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        self.number_distribution(mode).iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}
