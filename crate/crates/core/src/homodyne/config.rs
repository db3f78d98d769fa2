use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HomodyneError;

/// Points of the inverse-CDF sampling grid.
pub const SAMPLER_GRID_POINTS: usize = 2048;

/// How `(χ, ψ)` pairs are drawn for each record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Enumerate every `(χ, ψ)` grid pair in turn.
    Standard,
    /// Enumerate `χ`; draw `ψ` uniformly on `[0, 2π)`.
    PhaseRandom,
    /// Draw `χ` uniformly from the `χ` grid and `ψ` uniformly on `[0, 2π)`.
    FullRandom,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Standard => "standard",
            Strategy::PhaseRandom => "phase-random",
            Strategy::FullRandom => "full-random",
        })
    }
}

impl FromStr for Strategy {
    type Err = HomodyneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Strategy::Standard),
            "phase-random" => Ok(Strategy::PhaseRandom),
            "full-random" => Ok(Strategy::FullRandom),
            other => Err(HomodyneError::InvalidConfig(format!("unknown strategy '{other}'"))),
        }
    }
}

/// `n` angles `2πk/n`, `k = 0..n`.
fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// 64 rotation angles on `[0, 2π)`.
pub fn default_chi_grid() -> Vec<f64> {
    periodic_grid(64)
}

/// 16 LO phases on `[0, 2π)`.
pub fn default_psi_grid() -> Vec<f64> {
    periodic_grid(16)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomodyneConfig {
    /// `|α|` of the local oscillator; only scales [`super::bhd_moments`].
    pub lo_amplitude: f64,
    pub strategy: Strategy,
    pub n_samples: usize,
    pub chi_list: Vec<f64>,
    pub psi_list: Vec<f64>,
    pub seed: u64,
    pub grid_points: usize,
}

impl Default for HomodyneConfig {
    fn default() -> Self {
        Self {
            lo_amplitude: 1.0,
            strategy: Strategy::PhaseRandom,
            n_samples: 100_000,
            chi_list: default_chi_grid(),
            psi_list: default_psi_grid(),
            seed: 1,
            grid_points: SAMPLER_GRID_POINTS,
        }
    }
}

impl HomodyneConfig {
    pub fn validate(&self) -> Result<(), HomodyneError> {
        let bad = |m: String| Err(HomodyneError::InvalidConfig(m));
        if self.n_samples == 0 {
            return bad("n_samples must be positive".into());
        }
        if self.chi_list.is_empty() {
            return bad("chi_list is empty".into());
        }
        if self.strategy == Strategy::Standard && self.psi_list.is_empty() {
            return bad("psi_list is empty".into());
        }
        if self.chi_list.iter().chain(&self.psi_list).any(|x| !x.is_finite()) {
            return bad("non-finite angle".into());
        }
        if self.grid_points < 16 {
            return bad(format!("grid_points = {} (need at least 16)", self.grid_points));
        }
        if !(self.lo_amplitude.is_finite() && self.lo_amplitude >= 0.0) {
            return bad(format!("lo_amplitude = {}", self.lo_amplitude));
        }
        Ok(())
    }
}

/// One sampled homodyne event: rotation, LO phase and measured field strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneRecord {
    pub chi: f64,
    pub psi: f64,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in [Strategy::Standard, Strategy::PhaseRandom, Strategy::FullRandom] {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("random".parse::<Strategy>().is_err());
    }

    #[test]
    fn default_config_is_valid() {
        let c = HomodyneConfig::default();
        c.validate().unwrap();
        assert_eq!(c.chi_list.len(), 64);
        assert!(c.chi_list.iter().all(|&x| (0.0..2.0 * PI).contains(&x)));
        let bad = HomodyneConfig { n_samples: 0, ..c };
        assert!(bad.validate().is_err());
    }
}
