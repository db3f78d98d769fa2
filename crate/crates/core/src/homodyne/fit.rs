use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::{Histogram2D, HomodyneError};
use crate::numeric::{nelder_mead, NelderMeadOptions};

/// Relative RMS residual (w.r.t. peak density) above which a fit is rejected.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.5;

const RING_POINTS: usize = 64;

/// Model surface; chosen by the caller, never auto-detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// Phase-averaged coherent state: `(1/2π)∫ N(x; a₁cos t, w₁) N(y; a₂sin t, w₂) dt`.
    Ring,
    /// Product Gaussian `N(x; a₁, w₁) N(y; a₂, w₂)`.
    Gaussian,
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Ring => "ring",
            FitModel::Gaussian => "gaussian",
        })
    }
}

impl FromStr for FitModel {
    type Err = HomodyneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ring" => Ok(FitModel::Ring),
            "gaussian" => Ok(FitModel::Gaussian),
            other => Err(HomodyneError::InvalidConfig(format!("unknown fit model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    LevenbergMarquardt,
    NelderMead,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub optimizer: Optimizer,
    pub mean1: f64,
    pub mean2: f64,
    pub width1: f64,
    pub width2: f64,
    pub scale: f64,
    /// RMS residual divided by the peak histogram density.
    pub residual: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    model: FitModel,
    xc: Vec<f64>,
    yc: Vec<f64>,
    target: &'a [f64],
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
}

fn gauss(x: f64, mu: f64, w: f64) -> f64 {
    (-(x - mu).powi(2) / (2.0 * w * w)).exp() / ((2.0 * PI).sqrt() * w)
}

impl Problem<'_> {
    fn model(&self, p: &[f64]) -> Vec<f64> {
        let (a1, a2, w1, w2, s) = (p[0], p[1], p[2].abs().max(1e-6), p[3].abs().max(1e-6), p[4]);
        let (nx, ny) = (self.xc.len(), self.yc.len());
        let mut out = vec![0.0; nx * ny];
        match self.model {
            FitModel::Gaussian => {
                let gy: Vec<f64> = self.yc.iter().map(|&y| gauss(y, a2, w2)).collect();
                for (i, &x) in self.xc.iter().enumerate() {
                    let gx = s * gauss(x, a1, w1);
                    for j in 0..ny {
                        out[i * ny + j] = gx * gy[j];
                    }
                }
            }
            FitModel::Ring => {
                let t = self.cos_t.len();
                for k in 0..t {
                    let gx: Vec<f64> = self.xc.iter().map(|&x| gauss(x, a1 * self.cos_t[k], w1)).collect();
                    let gy: Vec<f64> = self.yc.iter().map(|&y| gauss(y, a2 * self.sin_t[k], w2)).collect();
                    for i in 0..nx {
                        let f = s * gx[i] / t as f64;
                        if f == 0.0 {
                            continue;
                        }
                        let row = &mut out[i * ny..(i + 1) * ny];
                        for (o, g) in row.iter_mut().zip(&gy) {
                            *o += f * g;
                        }
                    }
                }
            }
        }
        out
    }

    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        self.model(p).iter().zip(self.target).map(|(m, t)| m - t).collect()
    }

    fn cost(&self, p: &[f64]) -> f64 {
        self.residuals(p).iter().map(|r| r * r).sum()
    }

    fn initial_guess(&self) -> [f64; 5] {
        let ny = self.yc.len();
        let (mut m0, mut mx, mut my, mut mxx, mut myy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, &x) in self.xc.iter().enumerate() {
            for (j, &y) in self.yc.iter().enumerate() {
                let d = self.target[i * ny + j];
                m0 += d;
                mx += d * x;
                my += d * y;
                mxx += d * x * x;
                myy += d * y * y;
            }
        }
        let (mx, my, mxx, myy) = (mx / m0, my / m0, mxx / m0, myy / m0);
        match self.model {
            FitModel::Gaussian => [mx, my, (mxx - mx * mx).max(1e-4).sqrt(), (myy - my * my).max(1e-4).sqrt(), 1.0],
            FitModel::Ring => {
                let w0: f64 = 0.5;
                let a1 = (2.0 * (mxx - w0 * w0)).max(1e-4).sqrt();
                let a2 = (2.0 * (myy - w0 * w0)).max(1e-4).sqrt();
                [a1, a2, w0, w0, 1.0]
            }
        }
    }
}

fn levenberg_marquardt(pr: &Problem, p0: [f64; 5]) -> ([f64; 5], usize) {
    let mut p = SVector::<f64, 5>::from(p0);
    let mut r = pr.residuals(p.as_slice());
    let mut cost: f64 = r.iter().map(|x| x * x).sum();
    let mut lambda = 1e-3;
    let mut iters = 0;
    for it in 0..500 {
        iters = it + 1;
        let mut jac: Vec<Vec<f64>> = Vec::with_capacity(5);
        for k in 0..5 {
            let h = 1e-7 * p[k].abs().max(1e-2);
            let mut q = p;
            q[k] += h;
            let rq = pr.residuals(q.as_slice());
            jac.push(rq.iter().zip(&r).map(|(a, b)| (a - b) / h).collect());
        }
        let mut a = SMatrix::<f64, 5, 5>::zeros();
        let mut g = SVector::<f64, 5>::zeros();
        for i in 0..5 {
            g[i] = jac[i].iter().zip(&r).map(|(j, r)| j * r).sum();
            for k in i..5 {
                let v: f64 = jac[i].iter().zip(&jac[k]).map(|(x, y)| x * y).sum();
                a[(i, k)] = v;
                a[(k, i)] = v;
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = a;
            for i in 0..5 {
                damped[(i, i)] += lambda * a[(i, i)].max(1e-300);
            }
            let Some(step) = damped.lu().solve(&(-g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let rt = pr.residuals(trial.as_slice());
            let ct: f64 = rt.iter().map(|x| x * x).sum();
            if ct.is_finite() && ct < cost {
                let rel = (cost - ct) / cost.max(1e-300);
                let small = step.norm() <= 1e-12 * (p.norm() + 1e-12);
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-14 || small {
                    return (p.into(), iters);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (p.into(), iters)
}

fn finish(pr: &Problem, hist: &Histogram2D, p: [f64; 5], optimizer: Optimizer, iterations: usize) -> Result<FitResult, HomodyneError> {
    let n = hist.density.len() as f64;
    let peak = hist.density.iter().cloned().fold(0.0, f64::max);
    let residual = (pr.cost(&p) / n).sqrt() / peak;
    if !residual.is_finite() || residual > FIT_RESIDUAL_LIMIT || p.iter().any(|x| !x.is_finite()) {
        return Err(HomodyneError::FitDiverged { residual });
    }
    Ok(FitResult {
        model: pr.model,
        optimizer,
        mean1: p[0],
        mean2: p[1],
        width1: p[2].abs(),
        width2: p[3].abs(),
        scale: p[4],
        residual,
        iterations,
    })
}

/// Least-squares fit of `model` to the histogram density, by Levenberg-Marquardt.
pub fn fit_moments(hist: &Histogram2D, model: FitModel) -> Result<FitResult, HomodyneError> {
    fit_moments_with(hist, model, Optimizer::LevenbergMarquardt)
}

/// As [`fit_moments`], choosing the optimizer. Both minimize the same sum of
/// squared residuals from the same moment-based starting point.
pub fn fit_moments_with(hist: &Histogram2D, model: FitModel, optimizer: Optimizer) -> Result<FitResult, HomodyneError> {
    if hist.density.is_empty() {
        return Err(HomodyneError::EmptyRecords);
    }
    let cos_t: Vec<f64> = (0..RING_POINTS).map(|k| (2.0 * PI * k as f64 / RING_POINTS as f64).cos()).collect();
    let sin_t: Vec<f64> = (0..RING_POINTS).map(|k| (2.0 * PI * k as f64 / RING_POINTS as f64).sin()).collect();
    let pr = Problem { model, xc: hist.x_centers(), yc: hist.y_centers(), target: &hist.density, cos_t, sin_t };
    let p0 = pr.initial_guess();
    match optimizer {
        Optimizer::LevenbergMarquardt => {
            let (p, it) = levenberg_marquardt(&pr, p0);
            finish(&pr, hist, p, optimizer, it)
        }
        Optimizer::NelderMead => {
            let c0 = pr.cost(&p0);
            let opts = NelderMeadOptions { initial_step: 0.05, max_iter: 20_000, f_tol: 1e-16 * c0, x_tol: 1e-10 };
            let mut x = p0.to_vec();
            let mut total = 0;
            // restart until the simplex stops moving
            for _ in 0..4 {
                let res = nelder_mead(|q| pr.cost(q), &x, &opts);
                total += res.iterations;
                let moved = res.x.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                x = res.x;
                if moved < 1e-9 {
                    break;
                }
            }
            let p = [x[0], x[1], x[2], x[3], x[4]];
            finish(&pr, hist, p, optimizer, total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::ReconMethod;

    fn synthetic(model: FitModel, p: [f64; 5], n: usize, hw: f64) -> Histogram2D {
        let edges: Vec<f64> = (0..=n).map(|i| -hw + 2.0 * hw * i as f64 / n as f64).collect();
        let c: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let cos_t: Vec<f64> = (0..RING_POINTS).map(|k| (2.0 * PI * k as f64 / RING_POINTS as f64).cos()).collect();
        let sin_t: Vec<f64> = (0..RING_POINTS).map(|k| (2.0 * PI * k as f64 / RING_POINTS as f64).sin()).collect();
        let pr = Problem { model, xc: c.clone(), yc: c, target: &[], cos_t, sin_t };
        let density = pr.model(&p);
        Histogram2D { method: ReconMethod::Scatter, x_edges: edges.clone(), y_edges: edges, counts: None, density, n_samples: 0 }
    }

    #[test]
    fn recovers_exact_ring() {
        let h = synthetic(FitModel::Ring, [4.0, 3.5, 0.5, 0.6, 1.0], 60, 7.0);
        for opt in [Optimizer::LevenbergMarquardt, Optimizer::NelderMead] {
            let f = fit_moments_with(&h, FitModel::Ring, opt).unwrap();
            assert!((f.mean1 - 4.0).abs() < 1e-5, "{opt:?} {f:?}");
            assert!((f.mean2 - 3.5).abs() < 1e-5, "{opt:?} {f:?}");
            assert!((f.width1 - 0.5).abs() < 1e-5 && (f.width2 - 0.6).abs() < 1e-5, "{opt:?} {f:?}");
        }
    }

    #[test]
    fn recovers_exact_gaussian() {
        let h = synthetic(FitModel::Gaussian, [0.3, -0.2, 0.5, 0.5, 1.0], 50, 4.0);
        let f = fit_moments(&h, FitModel::Gaussian).unwrap();
        assert!((f.mean1 - 0.3).abs() < 1e-6 && (f.mean2 + 0.2).abs() < 1e-6);
        assert!(f.residual < 1e-6);
    }

    #[test]
    fn wrong_surface_diverges() {
        let mut h = synthetic(FitModel::Gaussian, [0.0, 0.0, 0.5, 0.5, 1.0], 30, 4.0);
        // checkerboard noise has no Gaussian description
        for (i, d) in h.density.iter_mut().enumerate() {
            *d = if (i + i / 30) % 2 == 0 { 1.0 } else { 0.0 };
        }
        assert!(matches!(fit_moments(&h, FitModel::Gaussian), Err(HomodyneError::FitDiverged { .. })));
    }
}
