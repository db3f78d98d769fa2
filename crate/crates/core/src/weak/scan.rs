use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{reconstruct_phase_1d, weak_couple, WeakError};
use crate::numeric::{cumulative_trapezoid, gauss_legendre, linspace, trapezoid};
use crate::state::{eigenfunctions, hermite_table_grid, Axis, FockState};

/// `χ_k = −π/2 + kπ/24`, `k = 1..=24`.
pub fn default_weak_chi_grid() -> Vec<f64> {
    (1..=24).map(|k| -FRAC_PI_2 + k as f64 * PI / 24.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeakConfig {
    /// Signal-meter mixing angle.
    pub gamma_w: f64,
    pub chi_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// Half-width `w` of the `|P₄| < w` postselection.
    pub postselect_window: f64,
    /// Bins below this fraction of the per-angle peak probability are masked.
    pub mask_threshold: f64,
    pub r_max: f64,
    /// An interior probability minimum below this fraction of the peak marks the angle as failed.
    pub node_ratio: f64,
    /// Gauss-Legendre nodes across the postselection window.
    pub quadrature_nodes: usize,
}

impl Default for WeakConfig {
    fn default() -> Self {
        Self {
            gamma_w: 0.05,
            chi_grid: default_weak_chi_grid(),
            p_grid: linspace(-4.0, 4.0, 321),
            postselect_window: 0.02,
            mask_threshold: 1e-3,
            r_max: 3.0,
            node_ratio: 0.01,
            quadrature_nodes: 16,
        }
    }
}

impl WeakConfig {
    pub fn validate(&self) -> Result<(), WeakError> {
        let bad = |m: String| Err(WeakError::InvalidConfig(m));
        if !(self.gamma_w.is_finite() && self.gamma_w > 0.0) {
            return bad(format!("gamma_w must be positive, got {}", self.gamma_w));
        }
        if !(self.postselect_window.is_finite() && self.postselect_window > 0.0) {
            return bad(format!("postselect_window must be positive, got {}", self.postselect_window));
        }
        if self.chi_grid.is_empty() || self.chi_grid.iter().any(|c| !c.is_finite()) {
            return bad("chi_grid must hold finite angles".into());
        }
        let p = &self.p_grid;
        if p.len() < 3 || p.windows(2).any(|w| !(w[1] > w[0])) || p.iter().any(|v| !v.is_finite()) {
            return bad("p_grid must be strictly increasing with at least 3 points".into());
        }
        if p[0] > 0.0 || p[p.len() - 1] < 0.0 {
            return bad("p_grid must cover p = 0".into());
        }
        if !(0.0..1.0).contains(&self.mask_threshold) || !(0.0..1.0).contains(&self.node_ratio) {
            return bad("mask_threshold and node_ratio must lie in [0, 1)".into());
        }
        if !(self.r_max > 0.0) || self.quadrature_nodes == 0 {
            return bad("r_max and quadrature_nodes must be positive".into());
        }
        Ok(())
    }

    /// Above ~0.2 the first-order response law no longer holds.
    pub fn exceeds_weak_regime(&self) -> bool {
        self.gamma_w > 0.2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakScanRecord {
    pub chi: f64,
    pub p: f64,
    /// Joint density of `P₃ = p` and `|P₄| < w`.
    pub probability: f64,
    /// Conditional mean meter field strength.
    pub meter_expectation: f64,
    pub phase: Option<f64>,
    pub masked: bool,
    /// `√(P / 2w)`, the conditional amplitude estimate.
    pub amplitude: f64,
}

/// One rotation angle of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiScan {
    pub chi: f64,
    pub records: Vec<WeakScanRecord>,
    /// Postselection probability from the Fock amplitudes.
    pub window_mass: f64,
    /// Trapezoid integral of the record probabilities over the p grid.
    pub grid_mass: f64,
    /// Probability node inside `r_max`; the 1-D phase on this ray is unreliable.
    pub failed: bool,
}

// T[n3][r] = Σ_{n4} amps[(n3·d + n4)·rest + r]·φ(n4)
fn contract_second(amps: &[C64], d: usize, rest: usize, phi4: &[C64]) -> Vec<C64> {
    let mut t = vec![C64::new(0.0, 0.0); d * rest];
    for n3 in 0..d {
        for (n4, f) in phi4.iter().enumerate() {
            let base = (n3 * d + n4) * rest;
            for r in 0..rest {
                t[n3 * rest + r] += amps[base + r] * f;
            }
        }
    }
    t
}

// b[i][r] = Σ_{n3} φ(n3, p_i)·T[n3][r]
fn expand_first(t: &[C64], d: usize, rest: usize, phi3: &[Vec<C64>], n_p: usize) -> Vec<C64> {
    let mut b = vec![C64::new(0.0, 0.0); n_p * rest];
    for (n3, row) in phi3.iter().enumerate().take(d) {
        for i in 0..n_p {
            let f = row[i];
            for r in 0..rest {
                b[i * rest + r] += f * t[n3 * rest + r];
            }
        }
    }
    b
}

fn meter_moment(b: &[C64]) -> f64 {
    (1..b.len()).map(|m| (m as f64).sqrt() * (b[m - 1].conj() * b[m]).re).sum()
}

struct Conditioned {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    d: usize,
    /// Meter amplitudes per node, `[k][i·d + μ]`.
    b: Vec<Vec<C64>>,
    window_mass: f64,
}

fn condition(state: &FockState, chi: f64, cfg: &WeakConfig) -> Result<Conditioned, WeakError> {
    let rotated = state.apply_rotation(chi, 1.0)?;
    let joint = weak_couple(&rotated, cfg.gamma_w)?;
    let d = joint.dim();
    let w = cfg.postselect_window;
    let (nodes, weights) = gauss_legendre(cfg.quadrature_nodes, -w, w);
    let phi3 = eigenfunctions(Axis::P, d - 1, &cfg.p_grid);
    let phi4 = eigenfunctions(Axis::P, d - 1, &nodes);
    let mut b = Vec::with_capacity(nodes.len());
    let mut window_mass = 0.0;
    for k in 0..nodes.len() {
        let col: Vec<C64> = phi4.iter().map(|r| r[k]).collect();
        let t = contract_second(joint.amplitudes(), d, d, &col);
        window_mass += weights[k] * t.iter().map(|z| z.norm_sqr()).sum::<f64>();
        b.push(expand_first(&t, d, d, &phi3, cfg.p_grid.len()));
    }
    Ok(Conditioned { nodes, weights, d, b, window_mass })
}

fn has_node(p: &[f64], prob: &[f64], r_max: f64, ratio: f64) -> bool {
    let peak = prob.iter().cloned().fold(0.0, f64::max);
    (1..prob.len() - 1).any(|i| {
        p[i].abs() < r_max && prob[i] < prob[i - 1] && prob[i] <= prob[i + 1] && prob[i] < ratio * peak
    })
}

fn finish(
    chi: f64,
    cfg: &WeakConfig,
    prob: Vec<f64>,
    meter: Vec<f64>,
    extra_mask: Vec<bool>,
    window_mass: f64,
) -> Result<ChiScan, WeakError> {
    let p = &cfg.p_grid;
    let grid_mass = trapezoid(p, &prob);
    if window_mass < 1e-12 || grid_mass < 1e-12 {
        return Err(WeakError::EmptyPostselection { chi, mass: window_mass.min(grid_mass) });
    }
    let peak = prob.iter().cloned().fold(0.0, f64::max);
    let two_w = 2.0 * cfg.postselect_window;
    let mut records: Vec<WeakScanRecord> = (0..p.len())
        .map(|i| WeakScanRecord {
            chi,
            p: p[i],
            probability: prob[i],
            meter_expectation: meter[i],
            phase: None,
            masked: extra_mask[i] || prob[i] < cfg.mask_threshold * peak,
            amplitude: (prob[i] / two_w).sqrt(),
        })
        .collect();
    let phases = reconstruct_phase_1d(&records, cfg.gamma_w)?;
    for (r, ph) in records.iter_mut().zip(phases) {
        r.phase = ph;
    }
    let failed = has_node(p, &prob, cfg.r_max, cfg.node_ratio);
    Ok(ChiScan { chi, records, window_mass, grid_mass, failed })
}

fn scan_one(state: &FockState, chi: f64, cfg: &WeakConfig) -> Result<ChiScan, WeakError> {
    let c = condition(state, chi, cfg)?;
    let n_p = cfg.p_grid.len();
    let (mut prob, mut mom) = (vec![0.0; n_p], vec![0.0; n_p]);
    for (k, bk) in c.b.iter().enumerate() {
        for i in 0..n_p {
            let b = &bk[i * c.d..(i + 1) * c.d];
            prob[i] += c.weights[k] * b.iter().map(|z| z.norm_sqr()).sum::<f64>();
            mom[i] += c.weights[k] * meter_moment(b);
        }
    }
    let meter: Vec<f64> = prob.iter().zip(&mom).map(|(&p, &m)| if p > 0.0 { m / p } else { 0.0 }).collect();
    finish(chi, cfg, prob, meter, vec![false; n_p], c.window_mass)
}

fn validate_state(state: &FockState) -> Result<(), WeakError> {
    if state.modes() != 2 {
        return Err(WeakError::InvalidConfig(format!("weak scan needs a two-mode state, got {} modes", state.modes())));
    }
    state.check_normalized()?;
    Ok(())
}

/// Exact weak scan, one [`ChiScan`] per angle of `cfg.chi_grid`.
pub fn weak_scan_detailed(state: &FockState, cfg: &WeakConfig) -> Result<Vec<ChiScan>, WeakError> {
    cfg.validate()?;
    validate_state(state)?;
    cfg.chi_grid.par_iter().map(|&chi| scan_one(state, chi, cfg)).collect()
}

/// Exact weak scan flattened to records, ordered by `χ` then `p`.
pub fn weak_scan(state: &FockState, cfg: &WeakConfig) -> Result<Vec<WeakScanRecord>, WeakError> {
    Ok(weak_scan_detailed(state, cfg)?.into_iter().flat_map(|s| s.records).collect())
}

const METER_GRID_POINTS: usize = 256;

fn sample_sorted(xs: &[f64], cdf: &[f64], u: f64) -> f64 {
    let target = u * cdf[cdf.len() - 1];
    let j = cdf.partition_point(|&c| c < target).clamp(1, cdf.len() - 1);
    let (c0, c1) = (cdf[j - 1], cdf[j]);
    let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
    xs[j - 1] + t * (xs[j] - xs[j - 1])
}

fn sampled_one(state: &FockState, chi: f64, cfg: &WeakConfig, n: usize, rng: &mut ChaCha8Rng) -> Result<ChiScan, WeakError> {
    let c = condition(state, chi, cfg)?;
    let p = &cfg.p_grid;
    let n_p = p.len();
    // trapezoid cell widths
    let dp: Vec<f64> = (0..n_p)
        .map(|i| 0.5 * (p[(i + 1).min(n_p - 1)] - p[i.saturating_sub(1)]))
        .collect();
    let mut cum = Vec::with_capacity(c.nodes.len() * n_p);
    let mut acc = 0.0;
    for (k, bk) in c.b.iter().enumerate() {
        for i in 0..n_p {
            acc += c.weights[k] * dp[i] * bk[i * c.d..(i + 1) * c.d].iter().map(|z| z.norm_sqr()).sum::<f64>();
            cum.push(acc);
        }
    }
    let mut counts = vec![0usize; cum.len()];
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * acc;
        counts[cum.partition_point(|&v| v < u).min(cum.len() - 1)] += 1;
    }
    let xs = linspace(-5.0, 5.0, METER_GRID_POINTS);
    let herm = hermite_table_grid(c.d - 1, &xs);
    let (mut hits, mut sum_x) = (vec![0usize; n_p], vec![0.0; n_p]);
    for (cell, &m) in counts.iter().enumerate().filter(|(_, &m)| m > 0) {
        let (k, i) = (cell / n_p, cell % n_p);
        let b = &c.b[k][i * c.d..(i + 1) * c.d];
        let dens: Vec<f64> = (0..xs.len())
            .map(|j| b.iter().enumerate().map(|(mu, z)| z * herm[mu][j]).sum::<C64>().norm_sqr())
            .collect();
        let cdf = cumulative_trapezoid(&xs, &dens);
        for _ in 0..m {
            sum_x[i] += sample_sorted(&xs, &cdf, rng.random::<f64>());
        }
        hits[i] += m;
    }
    let prob: Vec<f64> = (0..n_p).map(|i| hits[i] as f64 / (n as f64 * dp[i]) * c.window_mass).collect();
    let meter: Vec<f64> = (0..n_p).map(|i| if hits[i] > 0 { sum_x[i] / hits[i] as f64 } else { 0.0 }).collect();
    let empty: Vec<bool> = hits.iter().map(|&h| h < 2).collect();
    finish(chi, cfg, prob, meter, empty, c.window_mass)
}

/// Monte Carlo variant of [`weak_scan_detailed`]: `n_samples` postselected
/// events per angle, each drawing a `P₃` bin and a meter reading.
///
/// Angle `k` draws from stream `k` of `ChaCha8Rng::seed_from_u64(seed)`.
pub fn weak_scan_sampled(state: &FockState, cfg: &WeakConfig, n_samples: usize, seed: u64) -> Result<Vec<ChiScan>, WeakError> {
    cfg.validate()?;
    validate_state(state)?;
    if n_samples == 0 {
        return Err(WeakError::InvalidConfig("n_samples must be positive".into()));
    }
    cfg.chi_grid
        .par_iter()
        .enumerate()
        .map(|(k, &chi)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            sampled_one(state, chi, cfg, n_samples, &mut rng)
        })
        .collect()
}

/// `|Ψ|²`-weighted mean of `∂φ/∂p₃` over the postselection window, by central
/// differences of the rotated signal wavefunction.
///
/// This is the `Γ_w → 0` limit of `−2E/Γ_w`.
pub fn windowed_phase_gradient(state: &FockState, chi: f64, p: &[f64], cfg: &WeakConfig) -> Result<Vec<f64>, WeakError> {
    validate_state(state)?;
    const H: f64 = 1e-5;
    let rotated = state.apply_rotation(chi, 1.0)?;
    let d = rotated.dim();
    let w = cfg.postselect_window;
    let (nodes, weights) = gauss_legendre(cfg.quadrature_nodes, -w, w);
    let phi4 = eigenfunctions(Axis::P, d - 1, &nodes);
    let at = |xs: &[f64], t: &[C64]| expand_first(t, d, 1, &eigenfunctions(Axis::P, d - 1, xs), xs.len());
    let plus: Vec<f64> = p.iter().map(|x| x + H).collect();
    let minus: Vec<f64> = p.iter().map(|x| x - H).collect();
    let (mut num, mut den) = (vec![0.0; p.len()], vec![0.0; p.len()]);
    for k in 0..nodes.len() {
        let col: Vec<C64> = phi4.iter().map(|r| r[k]).collect();
        let t = contract_second(rotated.amplitudes(), d, 1, &col);
        let (f0, fp, fm) = (at(p, &t), at(&plus, &t), at(&minus, &t));
        for i in 0..p.len() {
            let grad = (fp[i] - fm[i]) / (2.0 * H);
            num[i] += weights[k] * (f0[i].conj() * grad).im;
            den[i] += weights[k] * f0[i].norm_sqr();
        }
    }
    Ok(num.iter().zip(&den).map(|(n, d)| if *d > 0.0 { n / d } else { 0.0 }).collect())
}
