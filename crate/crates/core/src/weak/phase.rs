use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{ChiScan, WeakConfig, WeakError, WeakScanRecord};
use crate::numeric::bracket;

/// Unwrapped phase along one ray, `φ(p) = −(2/Γ_w)∫ E dp` from the bin nearest
/// `p = 0` (where `φ = 0`).
///
/// Integration runs through masked bins; their phases come back as `None`.
/// Non-finite meter values contribute zero.
pub fn reconstruct_phase_1d(records: &[WeakScanRecord], gamma_w: f64) -> Result<Vec<Option<f64>>, WeakError> {
    if records.len() < 2 {
        return Err(WeakError::InvalidConfig("need at least two records along a ray".into()));
    }
    if !(gamma_w.is_finite() && gamma_w != 0.0) {
        return Err(WeakError::InvalidConfig(format!("gamma_w = {gamma_w}")));
    }
    let chi = records[0].chi;
    if records.iter().any(|r| r.chi != chi) || records.windows(2).any(|w| !(w[1].p > w[0].p)) {
        return Err(WeakError::InvalidConfig("records must share one chi and be sorted by p".into()));
    }
    let f: Vec<f64> = records
        .iter()
        .map(|r| if r.meter_expectation.is_finite() { -2.0 * r.meter_expectation / gamma_w } else { 0.0 })
        .collect();
    let i0 = (0..records.len())
        .min_by(|&a, &b| records[a].p.abs().total_cmp(&records[b].p.abs()))
        .unwrap();
    let mut phi = vec![0.0; records.len()];
    for i in i0 + 1..records.len() {
        phi[i] = phi[i - 1] + 0.5 * (f[i] + f[i - 1]) * (records[i].p - records[i - 1].p);
    }
    for i in (0..i0).rev() {
        phi[i] = phi[i + 1] - 0.5 * (f[i] + f[i + 1]) * (records[i + 1].p - records[i].p);
    }
    Ok(records.iter().zip(phi).map(|(r, v)| (!r.masked).then_some(v)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub p1: f64,
    pub p2: f64,
    pub phase: Option<f64>,
    pub amplitude: f64,
    pub masked: bool,
    /// The value was bridged across at least one failed angle.
    pub interpolated: bool,
}

/// Phase map on a `(p1, p2)` grid; `cells[i·p2.len() + j]` sits at `(p1[i], p2[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPhaseSurface {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub cells: Vec<SurfaceCell>,
    /// Angles (in `(−π/2, π/2]` as scanned) whose rays were replaced by interpolation.
    pub failed_angles: Vec<f64>,
}

impl JointPhaseSurface {
    pub fn cell(&self, i: usize, j: usize) -> &SurfaceCell {
        &self.cells[i * self.p2.len() + j]
    }
}

struct Ray<'a> {
    angle: f64,
    mirrored: bool,
    scan: &'a ChiScan,
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI { PI } else { y }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

// (phase, amplitude) at signed radius, or None when outside the grid or masked
fn ray_value(ray: &Ray, r: f64) -> Option<(f64, f64)> {
    let recs = &ray.scan.records;
    let p = if ray.mirrored { -r } else { r };
    let (lo, hi) = (recs[0].p, recs[recs.len() - 1].p);
    if p < lo && !close(p, lo) || p > hi && !close(p, hi) {
        return None;
    }
    let ps: Vec<f64> = recs.iter().map(|x| x.p).collect();
    let i = bracket(&ps, p);
    for k in [i, i + 1] {
        if close(p, ps[k]) {
            return recs[k].phase.map(|ph| (ph, recs[k].amplitude));
        }
    }
    let (a, b) = (&recs[i], &recs[i + 1]);
    let t = (p - a.p) / (b.p - a.p);
    match (a.phase, b.phase) {
        (Some(x), Some(y)) => Some((x + t * (y - x), a.amplitude + t * (b.amplitude - a.amplitude))),
        _ => None,
    }
}

fn rays_of<'a>(scans: impl Iterator<Item = &'a ChiScan>) -> Vec<Ray<'a>> {
    let mut rays: Vec<Ray> = Vec::new();
    for s in scans {
        for (mirrored, angle) in [(false, s.chi), (true, s.chi + PI)] {
            let angle = angle.rem_euclid(TAU);
            let angle = if close(angle, TAU) { 0.0 } else { angle };
            if !rays.iter().any(|r| close(r.angle, angle)) {
                rays.push(Ray { angle, mirrored, scan: s });
            }
        }
    }
    rays.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    rays
}

// true if some failed angle lies strictly inside the ccw arc (lo, hi)
fn arc_contains(lo: f64, hi: f64, failed: &[Ray]) -> bool {
    let span = (hi - lo).rem_euclid(TAU);
    let span = if span == 0.0 { TAU } else { span };
    failed.iter().any(|f| {
        let d = (f.angle - lo).rem_euclid(TAU);
        d > 1e-12 && d < span - 1e-12
    })
}

/// Assemble the 2-D phase map from per-angle scans.
///
/// Every ray `χ` covers the angles `χ` and `χ + π` (negative `p`). A grid point
/// on a usable ray takes that ray's value; otherwise the two neighbouring usable
/// rays are interpolated linearly in angle (on the circle, so a `2π` wrap does
/// not average out). Failed angles are skipped and flagged through
/// [`SurfaceCell::interpolated`]. If the bin at `p = 0` is masked or a
/// probability node on every ray the phase origin is undefined and the state
/// is rejected as not reconstructible. Points beyond `r_max` in either coordinate,
/// beyond the p grid, or next to a masked ray bin are masked.
pub fn assemble_joint_phase(
    scans: &[ChiScan],
    p1: &[f64],
    p2: &[f64],
    cfg: &WeakConfig,
) -> Result<JointPhaseSurface, WeakError> {
    if p1.is_empty() || p2.is_empty() {
        return Err(WeakError::InvalidConfig("empty output grid".into()));
    }
    if scans.iter().any(|s| s.records.len() < 2) {
        return Err(WeakError::InvalidConfig("every scan needs at least two records".into()));
    }
    let origin_ok = scans.iter().any(|s| {
        let i = (0..s.records.len())
            .min_by(|&a, &b| s.records[a].p.abs().total_cmp(&s.records[b].p.abs()))
            .unwrap();
        let prob = |k: usize| s.records[k].probability;
        let peak = s.records.iter().map(|r| r.probability).fold(0.0, f64::max);
        let is_min = (i == 0 || prob(i) <= prob(i - 1)) && (i + 1 == s.records.len() || prob(i) <= prob(i + 1));
        !(s.records[i].masked || is_min && prob(i) < cfg.node_ratio * peak)
    });
    if !origin_ok {
        return Err(WeakError::NotReconstructible);
    }
    let usable = rays_of(scans.iter().filter(|s| !s.failed));
    let failed = rays_of(scans.iter().filter(|s| s.failed));
    if usable.len() / 2 < 4 {
        return Err(WeakError::TooFewAngles { usable: usable.len() / 2 });
    }

    let mut cells = Vec::with_capacity(p1.len() * p2.len());
    for &x in p1 {
        for &y in p2 {
            let r = x.hypot(y);
            let theta = y.atan2(x).rem_euclid(TAU);
            let theta = if close(theta, TAU) { 0.0 } else { theta };
            let (value, interpolated) = if let Some(ray) = usable.iter().find(|ray| close(ray.angle, theta)) {
                (ray_value(ray, r), false)
            } else {
                let k = usable.partition_point(|ray| ray.angle < theta);
                let lo = &usable[(k + usable.len() - 1) % usable.len()];
                let hi = &usable[k % usable.len()];
                let span = (hi.angle - lo.angle).rem_euclid(TAU);
                let t = (theta - lo.angle).rem_euclid(TAU) / span;
                let v = match (ray_value(lo, r), ray_value(hi, r)) {
                    (Some((f0, a0)), Some((f1, a1))) => Some((f0 + t * wrap_pi(f1 - f0), a0 + t * (a1 - a0))),
                    _ => None,
                };
                (v, arc_contains(lo.angle, hi.angle, &failed))
            };
            let outside = x.abs() > cfg.r_max || y.abs() > cfg.r_max;
            let masked = outside || value.is_none();
            cells.push(SurfaceCell {
                p1: x,
                p2: y,
                phase: if masked { None } else { value.map(|v| v.0) },
                amplitude: value.map_or(0.0, |v| v.1),
                masked,
                interpolated,
            });
        }
    }
    Ok(JointPhaseSurface {
        p1: p1.to_vec(),
        p2: p2.to_vec(),
        cells,
        failed_angles: scans.iter().filter(|s| s.failed).map(|s| s.chi).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linspace;
    use crate::state::{noon2, FockState};
    use crate::weak::weak_scan_detailed;
    use crate::C64;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn rec(p: f64, e: f64) -> WeakScanRecord {
        WeakScanRecord { chi: 0.0, p, probability: 1.0, meter_expectation: e, phase: None, masked: false, amplitude: 1.0 }
    }

    #[test]
    fn constant_response_integrates_to_linear_phase() {
        let recs: Vec<_> = linspace(-1.0, 2.0, 31).into_iter().map(|p| rec(p, 0.05)).collect();
        let ph = reconstruct_phase_1d(&recs, 0.1).unwrap();
        for (r, v) in recs.iter().zip(ph) {
            assert!((v.unwrap() + r.p).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsorted_records() {
        let recs = vec![rec(1.0, 0.0), rec(0.0, 0.0)];
        assert!(reconstruct_phase_1d(&recs, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn phase_is_zero_at_origin_and_linear_in_response(scale in -3.0f64..3.0, n in 5usize..60) {
            let ps = linspace(-2.0, 2.0, 2 * n + 1);
            let a: Vec<_> = ps.iter().map(|&p| rec(p, (p * 1.3).sin())).collect();
            let b: Vec<_> = ps.iter().map(|&p| rec(p, scale * (p * 1.3).sin())).collect();
            let pa = reconstruct_phase_1d(&a, 0.05).unwrap();
            let pb = reconstruct_phase_1d(&b, 0.05).unwrap();
            prop_assert_eq!(pa[n], Some(0.0));
            for (x, y) in pa.iter().zip(&pb) {
                prop_assert!((x.unwrap() * scale - y.unwrap()).abs() < 1e-9);
            }
        }
    }

    fn noon_surface() -> (Vec<ChiScan>, JointPhaseSurface) {
        let cfg = WeakConfig { p_grid: linspace(-4.0, 4.0, 161), ..WeakConfig::default() };
        let scans = weak_scan_detailed(&noon2(), &cfg).unwrap();
        let grid = linspace(-3.0, 3.0, 121);
        let surf = assemble_joint_phase(&scans, &grid, &grid, &cfg).unwrap();
        (scans, surf)
    }

    #[test]
    fn surface_matches_zero_angle_ray_exactly() {
        let (scans, surf) = noon_surface();
        let ray = scans.iter().find(|s| s.chi.abs() < 1e-12).unwrap();
        let j0 = surf.p2.iter().position(|&y| y == 0.0).unwrap();
        for (i, &x) in surf.p1.iter().enumerate() {
            let cell = surf.cell(i, j0);
            let r = ray.records.iter().find(|r| (r.p - x).abs() < 1e-9).unwrap();
            assert_eq!(cell.phase, r.phase, "p1 = {x}");
            assert!(!cell.interpolated);
        }
    }

    #[test]
    fn interpolation_only_near_diagonals() {
        let (_, surf) = noon_surface();
        assert_eq!(surf.failed_angles.len(), 2);
        let step = PI / 24.0;
        for c in surf.cells.iter().filter(|c| c.interpolated) {
            let ang = c.p2.atan2(c.p1).rem_euclid(PI / 2.0);
            assert!((ang - FRAC_PI_4).abs() < step, "{c:?}");
        }
        assert!(surf.cells.iter().any(|c| c.interpolated));
    }

    #[test]
    fn vortex_at_origin_is_not_reconstructible() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = FockState::from_fock_list(2, 4, &[(vec![1, 0], C64::new(h, 0.0)), (vec![0, 1], C64::new(0.0, h))]).unwrap();
        let cfg = WeakConfig { p_grid: linspace(-4.0, 4.0, 161), ..WeakConfig::default() };
        let scans = weak_scan_detailed(&s, &cfg).unwrap();
        let grid = linspace(-2.0, 2.0, 5);
        assert_eq!(assemble_joint_phase(&scans, &grid, &grid, &cfg), Err(WeakError::NotReconstructible));
    }

    #[test]
    fn too_few_angles() {
        let cfg = WeakConfig { chi_grid: vec![0.0, 0.5, 1.0], p_grid: linspace(-4.0, 4.0, 81), ..WeakConfig::default() };
        let scans = weak_scan_detailed(&noon2(), &cfg).unwrap();
        let grid = linspace(-1.0, 1.0, 3);
        assert_eq!(assemble_joint_phase(&scans, &grid, &grid, &cfg), Err(WeakError::TooFewAngles { usable: 3 }));
    }
}
