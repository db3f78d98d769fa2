use num_complex::Complex64 as C64;
use qcoupler_core::homodyne::*;
use qcoupler_core::state::{noon2, quadrature_density, uniform_grid, Axis, FockState};

fn circular() -> FockState {
    FockState::coherent_product(&[C64::new(4.0, 0.0), C64::new(0.0, 4.0)], 60).unwrap()
}

#[test]
fn circular_state_ring_fit() {
    let cfg = HomodyneConfig { strategy: Strategy::PhaseRandom, n_samples: 100_000, seed: 7, ..Default::default() };
    let t = std::time::Instant::now();
    let recs = run_campaign(&circular(), &cfg).unwrap();
    let t_campaign = t.elapsed();
    let spec = BinSpec { bins: 100, half_width: Some(7.0), ..Default::default() };
    let fbp = reconstruct_joint(&recs, ReconMethod::BackProjection, &spec).unwrap();
    let lm = fit_moments_with(&fbp, FitModel::Ring, Optimizer::LevenbergMarquardt).unwrap();
    let nm = fit_moments_with(&fbp, FitModel::Ring, Optimizer::NelderMead).unwrap();
    let sc = reconstruct_joint(&recs, ReconMethod::Scatter, &spec).unwrap();
    let sc_fit = fit_moments(&sc, FitModel::Ring);
    println!("campaign {t_campaign:?} total {:?}\nlm {lm:?}\nnm {nm:?}\nscatter {sc_fit:?}", t.elapsed());
    assert!((lm.mean1 - 4.0).abs() < 0.05 && (lm.mean2 - 4.0).abs() < 0.05);
}

#[test]
fn vacuum_campaign_moments() {
    let cfg = HomodyneConfig { n_samples: 100_000, seed: 3, ..Default::default() };
    let recs = run_campaign(&FockState::vacuum(2, 4), &cfg).unwrap();
    let n = recs.len() as f64;
    let mean = recs.iter().map(|r| r.value).sum::<f64>() / n;
    let var = recs.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.005, "{mean}");
    assert!((var - 0.25).abs() < 0.005, "{var}");
}

#[test]
fn vacuum_back_projection_is_gaussian() {
    let cfg = HomodyneConfig { n_samples: 100_000, seed: 5, ..Default::default() };
    let recs = run_campaign(&FockState::vacuum(2, 4), &cfg).unwrap();
    let spec = BinSpec { bins: 60, half_width: Some(3.0), ..Default::default() };
    let h = reconstruct_joint(&recs, ReconMethod::BackProjection, &spec).unwrap();
    let f = fit_moments(&h, FitModel::Gaussian).unwrap();
    println!("{f:?}");
    assert!(f.mean1.abs() < 0.01 && f.mean2.abs() < 0.01);
    assert!((f.width1 - 0.5).abs() < 0.025 && (f.width2 - 0.5).abs() < 0.025);
}

#[test]
fn noon_marginal_from_campaign_grid() {
    let xs = uniform_grid(5.0, 401);
    let d = quadrature_density(&noon2(), 0, Axis::E, &xs).unwrap();
    assert!((d.mass() - 1.0).abs() < 1e-9);
}
