use serde::{Deserialize, Serialize};

use super::{HomodyneError, PhaseHarmonics};
use crate::numeric::trapezoid;
use crate::state::{quadrature_density, Axis, FieldValues, FockState, QuadratureField};

/// Settings of one measurement stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSetting {
    pub chi: f64,
    pub sign: f64,
    /// LO phase; `None` gives the phase-averaged density.
    pub psi: Option<f64>,
}

/// Run an `N`-mode state through `N − 1` stages.
///
/// Stage `k` rotates modes `(k, k+1)`; its upper output (mode `k`) goes to a
/// homodyne detector and its lower output (mode `k+1`) is carried to stage `k+1`.
/// Returns the field-strength density measured at each stage on `xs`.
pub fn chain_stages(state: &FockState, stages: &[StageSetting], xs: &[f64]) -> Result<Vec<QuadratureField>, HomodyneError> {
    let n = state.modes();
    if n < 2 || stages.len() != n - 1 {
        return Err(HomodyneError::InvalidConfig(format!("{n} modes need {} stages, got {}", n.saturating_sub(1), stages.len())));
    }
    let mut carry = state.clone();
    let mut out = Vec::with_capacity(stages.len());
    for (k, st) in stages.iter().enumerate() {
        carry = carry.rotate_modes(k, k + 1, st.chi, st.sign)?;
        let field = match st.psi {
            Some(psi) => quadrature_density(&carry.apply_lo_phase(psi, k), k, Axis::E, xs)?,
            None => {
                let h = PhaseHarmonics::on_grid(&carry.reduced_density(k), xs.to_vec())?;
                let mut d = h.averaged_density();
                let mass = trapezoid(xs, &d);
                d.iter_mut().for_each(|p| *p /= mass);
                QuadratureField { axis: Axis::E, x: xs.to_vec(), y: None, values: FieldValues::Density(d) }
            }
        };
        out.push(field);
    }
    Ok(out)
}
