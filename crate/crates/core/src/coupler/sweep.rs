use serde::{Deserialize, Serialize};

use super::{cell_response, CouplerError, CouplerSettings};
use crate::numeric::linspace;

/// CSV header for sweep output.
pub const SWEEP_HEADER: [&str; 4] = ["delta_over_k0", "A", "B", "theta"];

/// One sample of the device response against normalized mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta_over_k0: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

/// `A`, `B`, `θ` for `points` values of `δ/k₀` evenly spaced on `[from, to]`.
pub fn sweep(base: &CouplerSettings, from: f64, to: f64, points: usize) -> Result<Vec<SweepRow>, CouplerError> {
    base.validate()?;
    if points == 0 || !from.is_finite() || !to.is_finite() {
        return Err(CouplerError::InvalidSettings(format!("sweep range [{from}, {to}] x {points}")));
    }
    let k0 = base.k0();
    Ok(linspace(from, to, points)
        .into_iter()
        .map(|r| {
            let c = cell_response(&base.with_delta(r * k0));
            SweepRow { delta_over_k0: r, a: c.a_coef, b: c.b_coef, theta: c.theta }
        })
        .collect())
}
