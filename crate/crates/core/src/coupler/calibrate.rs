use std::f64::consts::PI;

use super::{cell_response, CouplerError, CouplerSettings};
use crate::numeric::linspace;

/// Points in the monotonicity pre-scan of χ(δ).
pub const DELTA_PRESCAN_POINTS: usize = 10_000;

fn chi_at(base: &CouplerSettings, delta: f64) -> f64 {
    cell_response(&base.with_delta(delta)).chi
}

/// First monotone branch of χ(δ) above δ = 0.
///
/// Scans `β_r·L` up to `κL + 2π` and stops at the first direction reversal.
pub fn default_delta_window(base: &CouplerSettings) -> Result<(f64, f64), CouplerError> {
    base.validate()?;
    let x_max = base.kappa * base.length + 2.0 * PI;
    let d_max = ((x_max / base.length).powi(2) - base.kappa.powi(2)).sqrt();
    let grid = linspace(0.0, d_max, DELTA_PRESCAN_POINTS);
    let chis: Vec<f64> = grid.iter().map(|&d| chi_at(base, d)).collect();
    let mut dir = 0.0;
    for k in 1..grid.len() {
        let step = chis[k] - chis[k - 1];
        if step == 0.0 {
            continue;
        }
        if dir == 0.0 {
            dir = step.signum();
        } else if step.signum() != dir {
            // the turning point lies in [grid[k-2], grid[k]]
            return Ok((0.0, grid[k.saturating_sub(2)]));
        }
    }
    Ok((0.0, d_max))
}

/// Find `δ` with `χ(δ) = target_theta/2` inside `delta_window` and set the phase
/// shifters for `target_phi`.
///
/// The window (default: [`default_delta_window`]) is pre-scanned on
/// [`DELTA_PRESCAN_POINTS`] points; a direction reversal of χ is rejected as
/// `NonMonotoneWindow`, a target outside the scanned range as `TargetUnreachable`.
/// The root is then refined by bisection to 1e-12 relative width.
pub fn solve_settings(
    target_theta: f64,
    target_phi: f64,
    base: &CouplerSettings,
    delta_window: Option<(f64, f64)>,
) -> Result<CouplerSettings, CouplerError> {
    base.validate()?;
    if !target_theta.is_finite() || !target_phi.is_finite() {
        return Err(CouplerError::InvalidSettings("target angles must be finite".into()));
    }
    let (lo, hi) = match delta_window {
        Some(w) => w,
        None => default_delta_window(base)?,
    };
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(CouplerError::InvalidSettings(format!("delta window [{lo}, {hi}]")));
    }
    let target = target_theta / 2.0;

    let grid = linspace(lo, hi, DELTA_PRESCAN_POINTS);
    let chis: Vec<f64> = grid.iter().map(|&d| chi_at(base, d)).collect();
    let mut dir = 0.0;
    for k in 1..grid.len() {
        let step = chis[k] - chis[k - 1];
        if step == 0.0 {
            continue;
        }
        if dir == 0.0 {
            dir = step.signum();
        } else if step.signum() != dir {
            return Err(CouplerError::NonMonotoneWindow { at: grid[k - 1] });
        }
    }
    let chi_min = chis.iter().cloned().fold(f64::INFINITY, f64::min);
    let chi_max = chis.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(chi_min..=chi_max).contains(&target) {
        return Err(CouplerError::TargetUnreachable { target, lo, hi, chi_min, chi_max });
    }

    // bracket from the scan, oriented so that f(a) <= 0 <= f(b)
    let dir = if dir == 0.0 { 1.0 } else { dir };
    let f = |d: f64| (chi_at(base, d) - target) * dir;
    let k = (1..grid.len())
        .find(|&k| (chis[k - 1] - target) * (chis[k] - target) <= 0.0)
        .unwrap_or(1);
    let (mut a, mut b) = (grid[k - 1], grid[k]);
    if f(a) > 0.0 {
        std::mem::swap(&mut a, &mut b);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= 1e-12 * a.abs().max(b.abs()) || m == a || m == b {
            break;
        }
        if f(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let fa = f(a).abs();
    let fb = f(b).abs();
    let delta = if fa <= fb { a } else { b };
    Ok(base.with_delta(delta).with_su2_phases(target_phi))
}
