use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HomodyneError, HomodyneRecord};
use crate::numeric::interp;

/// Fewest distinct `χ` accepted by back-projection.
pub const MIN_PROJECTION_ANGLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconMethod {
    /// Each record deposits a point at `(E₃ cos χ, E₃ sin χ)`.
    Scatter,
    /// Filtered back-projection of the per-`χ` marginals (Ram-Lak filter).
    BackProjection,
}

impl fmt::Display for ReconMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconMethod::Scatter => "scatter",
            ReconMethod::BackProjection => "back-projection",
        })
    }
}

impl FromStr for ReconMethod {
    type Err = HomodyneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scatter" => Ok(ReconMethod::Scatter),
            "back-projection" | "backprojection" | "fbp" => Ok(ReconMethod::BackProjection),
            other => Err(HomodyneError::InvalidConfig(format!("unknown reconstruction method '{other}'"))),
        }
    }
}

/// Placement of scatter points: signed value along `χ`, or its magnitude.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatterSign {
    #[default]
    Signed,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    /// Bins per axis of the output grid.
    pub bins: usize,
    /// Output range `[−h, h]²`; `None` covers every record.
    pub half_width: Option<f64>,
    /// Bin width of the per-angle projections (back-projection only).
    pub projection_bin: f64,
    pub scatter_sign: ScatterSign,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self { bins: 100, half_width: None, projection_bin: 0.1, scatter_sign: ScatterSign::Signed }
    }
}

/// Reconstructed joint density on a square grid, row-major with `E₁` slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub method: ReconMethod,
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// Raw counts (scatter only).
    pub counts: Option<Vec<u64>>,
    /// Normalized density; may be slightly negative for back-projection.
    pub density: Vec<f64>,
    /// Records that landed inside the grid.
    pub n_samples: usize,
}

fn centers(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

impl Histogram2D {
    pub fn x_centers(&self) -> Vec<f64> {
        centers(&self.x_edges)
    }

    pub fn y_centers(&self) -> Vec<f64> {
        centers(&self.y_edges)
    }

    pub fn bin_area(&self) -> f64 {
        (self.x_edges[1] - self.x_edges[0]) * (self.y_edges[1] - self.y_edges[0])
    }

    /// Sum of density times bin area.
    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_area()
    }
}

fn edges(hw: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| -hw + 2.0 * hw * i as f64 / bins as f64).collect()
}

/// Build a 2-D joint density from homodyne records.
pub fn reconstruct_joint(records: &[HomodyneRecord], method: ReconMethod, spec: &BinSpec) -> Result<Histogram2D, HomodyneError> {
    if records.is_empty() {
        return Err(HomodyneError::EmptyRecords);
    }
    if spec.bins == 0 || !(spec.projection_bin > 0.0) {
        return Err(HomodyneError::InvalidConfig("bins and projection_bin must be positive".into()));
    }
    let max_abs = records.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
    let hw = spec.half_width.unwrap_or(max_abs * (1.0 + 1e-9) + 1e-12);
    if !(hw > 0.0 && hw.is_finite()) {
        return Err(HomodyneError::InvalidConfig(format!("half width {hw}")));
    }
    match method {
        ReconMethod::Scatter => Ok(scatter(records, hw, spec)),
        ReconMethod::BackProjection => back_projection(records, hw, spec),
    }
}

fn scatter(records: &[HomodyneRecord], hw: f64, spec: &BinSpec) -> Histogram2D {
    let n = spec.bins;
    let width = 2.0 * hw / n as f64;
    let mut counts = vec![0u64; n * n];
    let mut kept = 0usize;
    let cell = |v: f64| -> Option<usize> {
        let k = ((v + hw) / width).floor();
        if k < 0.0 || k > n as f64 || v > hw {
            None
        } else {
            Some((k as usize).min(n - 1))
        }
    };
    for r in records {
        let v = match spec.scatter_sign {
            ScatterSign::Signed => r.value,
            ScatterSign::Absolute => r.value.abs(),
        };
        let (s, c) = r.chi.sin_cos();
        if let (Some(i), Some(j)) = (cell(v * c), cell(v * s)) {
            counts[i * n + j] += 1;
            kept += 1;
        }
    }
    let norm = if kept > 0 { 1.0 / (kept as f64 * width * width) } else { 0.0 };
    let density = counts.iter().map(|&c| c as f64 * norm).collect();
    Histogram2D {
        method: ReconMethod::Scatter,
        x_edges: edges(hw, n),
        y_edges: edges(hw, n),
        counts: Some(counts),
        density,
        n_samples: kept,
    }
}

/// Ram-Lak kernel sampled at spacing `ds`, offsets `−(k−1)..=(k−1)`.
fn ram_lak(k: usize, ds: f64) -> Vec<f64> {
    (-(k as i64) + 1..k as i64)
        .map(|n| match n {
            0 => 1.0 / (4.0 * ds * ds),
            n if n % 2 != 0 => -1.0 / (PI * n as f64 * ds).powi(2),
            _ => 0.0,
        })
        .collect()
}

fn back_projection(records: &[HomodyneRecord], hw: f64, spec: &BinSpec) -> Result<Histogram2D, HomodyneError> {
    let mut angles: Vec<f64> = records.iter().map(|r| r.chi).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if angles.len() < MIN_PROJECTION_ANGLES {
        return Err(HomodyneError::InsufficientAngles { found: angles.len(), needed: MIN_PROJECTION_ANGLES });
    }

    // per-angle projections on a common symmetric support
    let ds = spec.projection_bin;
    let radius = records.iter().map(|r| r.value.abs()).fold(hw, f64::max);
    let k = (2.0 * radius / ds).ceil() as usize + 1;
    let s0 = -(k as f64) * ds / 2.0;
    let s_centers: Vec<f64> = (0..k).map(|i| s0 + (i as f64 + 0.5) * ds).collect();
    let mut hists = vec![vec![0.0; k]; angles.len()];
    for r in records {
        let a = angles.partition_point(|&x| x < r.chi - 1e-12).min(angles.len() - 1);
        let b = (((r.value - s0) / ds).floor() as usize).min(k - 1);
        hists[a][b] += 1.0;
    }
    let kernel = ram_lak(k, ds);
    let filtered: Vec<Vec<f64>> = hists
        .iter()
        .map(|h| {
            let total: f64 = h.iter().sum::<f64>() * ds;
            let p: Vec<f64> = h.iter().map(|c| c / total).collect();
            (0..k)
                .map(|i| (0..k).map(|j| p[j] * kernel[i + k - 1 - j]).sum::<f64>() * ds)
                .collect()
        })
        .collect();

    // mirrored views (χ + π, s → −s) then periodic Voronoi weights
    let mut views: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * angles.len());
    for (i, &chi) in angles.iter().enumerate() {
        views.push((chi.rem_euclid(2.0 * PI), i, false));
        views.push(((chi + PI).rem_euclid(2.0 * PI), i, true));
    }
    views.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = views.len();
    let weights: Vec<f64> = (0..m)
        .map(|i| {
            let prev = views[(i + m - 1) % m].0;
            let next = views[(i + 1) % m].0;
            let gap_prev = (views[i].0 - prev).rem_euclid(2.0 * PI);
            let gap_next = (next - views[i].0).rem_euclid(2.0 * PI);
            0.5 * (gap_prev + gap_next)
        })
        .collect();

    let n = spec.bins;
    let xe = edges(hw, n);
    let xc = centers(&xe);
    let mut density = vec![0.0; n * n];
    for (v, &(ang, idx, mirrored)) in views.iter().enumerate() {
        let (sa, ca) = ang.sin_cos();
        let q = &filtered[idx];
        let w = 0.5 * weights[v];
        for (i, &x) in xc.iter().enumerate() {
            for (j, &y) in xc.iter().enumerate() {
                let s = x * ca + y * sa;
                let s = if mirrored { -s } else { s };
                if s < s_centers[0] || s > s_centers[k - 1] {
                    continue;
                }
                density[i * n + j] += w * interp(&s_centers, q, s);
            }
        }
    }
    let area = (xe[1] - xe[0]).powi(2);
    let mass: f64 = density.iter().sum::<f64>() * area;
    if mass.abs() > 0.0 {
        density.iter_mut().for_each(|d| *d /= mass);
    }
    Ok(Histogram2D {
        method: ReconMethod::BackProjection,
        x_edges: xe.clone(),
        y_edges: xe,
        counts: None,
        density,
        n_samples: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_of_points() -> Vec<HomodyneRecord> {
        (0..64)
            .flat_map(|k| {
                let chi = 2.0 * PI * k as f64 / 64.0;
                [-2.0, -1.0, 1.0, 2.0].map(|v| HomodyneRecord { chi, psi: 0.0, value: v })
            })
            .collect()
    }

    #[test]
    fn scatter_counts_everything() {
        let recs = ring_of_points();
        let h = reconstruct_joint(&recs, ReconMethod::Scatter, &BinSpec { bins: 20, ..Default::default() }).unwrap();
        assert_eq!(h.counts.as_ref().unwrap().iter().sum::<u64>(), recs.len() as u64);
        assert_eq!(h.n_samples, recs.len());
        assert!((h.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absolute_scatter_folds_sign() {
        let recs = vec![HomodyneRecord { chi: 0.0, psi: 0.0, value: -1.0 }];
        let spec = BinSpec { bins: 2, half_width: Some(2.0), scatter_sign: ScatterSign::Absolute, ..Default::default() };
        let h = reconstruct_joint(&recs, ReconMethod::Scatter, &spec).unwrap();
        // (1, 0) lands in the +x half
        assert_eq!(h.counts.unwrap(), vec![0, 0, 0, 1]);
    }

    #[test]
    fn back_projection_needs_angles() {
        let recs: Vec<_> = (0..5).map(|k| HomodyneRecord { chi: k as f64, psi: 0.0, value: 0.1 }).collect();
        let err = reconstruct_joint(&recs, ReconMethod::BackProjection, &BinSpec::default()).unwrap_err();
        assert_eq!(err, HomodyneError::InsufficientAngles { found: 5, needed: 8 });
    }

    #[test]
    fn back_projection_is_normalized() {
        let h = reconstruct_joint(&ring_of_points(), ReconMethod::BackProjection, &BinSpec { bins: 40, ..Default::default() }).unwrap();
        assert!(h.counts.is_none());
        assert!((h.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn method_names() {
        assert_eq!("fbp".parse::<ReconMethod>().unwrap(), ReconMethod::BackProjection);
        assert_eq!(ReconMethod::BackProjection.to_string(), "back-projection");
    }
}
