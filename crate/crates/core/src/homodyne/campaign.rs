use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{HomodyneConfig, HomodyneError, HomodyneRecord, PhaseHarmonics, Strategy, SAMPLER_GRID_POINTS};
use crate::numeric::trapezoid;
use crate::state::{FieldValues, FockState, QuadratureField, Axis};

/// Records per RNG stream; chunk `c` draws from stream `c` of the seeded generator.
pub const CHUNK_SIZE: usize = 4096;

fn harmonics_at(state: &FockState, chi: f64, points: usize) -> Result<PhaseHarmonics, HomodyneError> {
    let rho = state.apply_rotation(chi, 1.0)?.reduced_density(0);
    PhaseHarmonics::new(&rho, points)
}

/// Sample `config.n_samples` homodyne records from the exact field-strength
/// density of the measured mode.
///
/// Output depends only on `(state, config)`; the worker count does not matter.
pub fn run_campaign(state: &FockState, config: &HomodyneConfig) -> Result<Vec<HomodyneRecord>, HomodyneError> {
    config.validate()?;
    state.check_normalized()?;
    let samplers: Vec<PhaseHarmonics> = config
        .chi_list
        .par_iter()
        .map(|&chi| harmonics_at(state, chi, config.grid_points))
        .collect::<Result<_, _>>()?;

    let n = config.n_samples;
    let n_chi = config.chi_list.len();
    let n_psi = config.psi_list.len().max(1);
    let chunks = n.div_ceil(CHUNK_SIZE);
    let out: Vec<Vec<HomodyneRecord>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c as u64);
            let start = c * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(n);
            (start..end)
                .map(|r| {
                    let (ci, psi) = match config.strategy {
                        Strategy::Standard => ((r / n_psi) % n_chi, config.psi_list[r % n_psi]),
                        Strategy::PhaseRandom => (r % n_chi, rng.random::<f64>() * 2.0 * PI),
                        Strategy::FullRandom => {
                            let ci = rng.random_range(0..n_chi);
                            (ci, rng.random::<f64>() * 2.0 * PI)
                        }
                    };
                    let u: f64 = rng.random();
                    HomodyneRecord { chi: config.chi_list[ci], psi, value: samplers[ci].sample(u, psi) }
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// `(1/2π)∫P_ψ(x)dψ` by the periodic trapezoid rule on `psi_grid`, normalized.
///
/// `psi_grid` must be uniform with spacing `2π/len`. When `xs` is `None` the
/// default sampler grid is used.
pub fn phase_averaged_density(
    state: &FockState,
    chi: f64,
    psi_grid: &[f64],
    xs: Option<&[f64]>,
) -> Result<QuadratureField, HomodyneError> {
    let n = psi_grid.len();
    if n == 0 {
        return Err(HomodyneError::InvalidConfig("empty psi grid".into()));
    }
    let step = 2.0 * PI / n as f64;
    if psi_grid.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9) {
        return Err(HomodyneError::InvalidConfig("psi grid must cover [0, 2π) uniformly".into()));
    }
    let rho = state.apply_rotation(chi, 1.0)?.reduced_density(0);
    let h = match xs {
        Some(x) => PhaseHarmonics::on_grid(&rho, x.to_vec())?,
        None => PhaseHarmonics::new(&rho, SAMPLER_GRID_POINTS)?,
    };
    let mut acc = vec![0.0; h.grid().len()];
    for &psi in psi_grid {
        for (a, p) in acc.iter_mut().zip(h.density(psi)) {
            *a += p / n as f64;
        }
    }
    let mass = trapezoid(h.grid(), &acc);
    acc.iter_mut().for_each(|p| *p /= mass);
    Ok(QuadratureField { axis: Axis::E, x: h.grid().to_vec(), y: None, values: FieldValues::Density(acc) })
}
