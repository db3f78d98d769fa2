use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::time::Instant;

use qcoupler_core::coupler::*;
use qcoupler_core::homodyne::*;
use qcoupler_core::numeric::linspace;
use qcoupler_core::state::{joint_wavefunction, quadrature_density, uniform_grid, Axis, FockState};
use qcoupler_core::weak::*;
use serde_json::json;

use crate::args::*;
use crate::config::Resolver;
use crate::error::CliError;
use crate::manifest::{manifest_path, RunManifest};
use crate::output::{fmt_f64, sibling, write_csv, write_json};
use crate::statespec::parse_state_spec;

pub const OUT_DIR_ENV: &str = "QCOUPLER_OUT_DIR";

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_flag<T>(v: &Option<String>) -> Result<Option<T>, CliError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    v.as_ref().map(|s| s.parse::<T>().map_err(|e| usage(e.to_string()))).transpose()
}

fn default_out(name: &str, ext: &str) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{name}.{ext}"))
}

struct Run {
    name: &'static str,
    resolver: Resolver,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

enum KappaDefault {
    OverK0(f64),
    PerMm(f64),
}

impl Run {
    fn device(&mut self, d: &DeviceArgs, default: KappaDefault) -> Result<CouplerSettings, CliError> {
        let wavelength = self.resolver.value("wavelength-nm", d.wavelength_nm, 650.0)? * 1e-9;
        let length = self.resolver.value("length-mm", d.length_mm, 2.0)? * 1e-3;
        let over = self.resolver.optional("kappa-over-k0", d.kappa_over_k0)?;
        let per_mm = self.resolver.optional("kappa-per-mm", d.kappa_per_mm)?;
        let k0 = 2.0 * PI / wavelength;
        let kappa = match (over, per_mm, default) {
            (Some(_), Some(_), _) => return Err(usage("give only one of --kappa-over-k0 and --kappa-per-mm")),
            (Some(r), None, _) => r * k0,
            (None, Some(k), _) => k * 1e3,
            (None, None, KappaDefault::OverK0(r)) => self.resolver.value("kappa-over-k0", None, r)? * k0,
            (None, None, KappaDefault::PerMm(k)) => self.resolver.value("kappa-per-mm", None, k)? * 1e3,
        };
        let s = CouplerSettings::new(kappa, length, wavelength);
        s.validate()?;
        Ok(s)
    }

    fn state(&mut self, input: &StateInput, default: &str) -> Result<FockState, CliError> {
        let file = self.resolver.optional("state-file", input.state_file.as_ref().map(|p| p.display().to_string()))?;
        let spec = self.resolver.optional("state", input.state.clone())?;
        let state = match (spec, file) {
            (Some(_), Some(_)) => return Err(usage("give only one of --state and --state-file")),
            (None, Some(f)) => {
                let path = PathBuf::from(f);
                let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                let s: FockState =
                    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.clone(), source })?;
                self.inputs.push(path);
                s
            }
            (Some(spec), None) => parse_state_spec(&spec)?,
            (None, None) => parse_state_spec(&self.resolver.value("state", None, default.to_string())?)?,
        };
        if state.modes() != 2 {
            return Err(usage(format!("expected a two-mode state, got {} modes", state.modes())));
        }
        state.check_normalized()?;
        Ok(state)
    }
}

fn sweep_cmd(run: &mut Run, a: &SweepArgs) -> Result<Box<dyn FnOnce(&Path) -> Result<(), CliError>>, CliError> {
    let base = run.device(&a.device, KappaDefault::OverK0(0.1))?;
    let from = run.resolver.value("from", a.from, 0.0)?;
    let to = run.resolver.value("to", a.to, 0.01)?;
    let points = run.resolver.value("points", a.points, 1001usize)?;
    let rows = sweep(&base, from, to, points)?;
    Ok(Box::new(move |out| {
        let rows = rows.into_iter().map(|r| vec![fmt_f64(r.delta_over_k0), fmt_f64(r.a), fmt_f64(r.b), fmt_f64(r.theta)]);
        write_csv(out, &SWEEP_HEADER, rows)
    }))
}

fn solve_window(run: &mut Run, lo: Option<f64>, hi: Option<f64>) -> Result<Option<(f64, f64)>, CliError> {
    let lo = run.resolver.optional("delta-min-per-mm", lo)?;
    let hi = run.resolver.optional("delta-max-per-mm", hi)?;
    match (lo, hi) {
        (Some(a), Some(b)) => Ok(Some((a * 1e3, b * 1e3))),
        (None, None) => Ok(None),
        _ => Err(usage("give both --delta-min-per-mm and --delta-max-per-mm")),
    }
}

fn solve_report(base: &CouplerSettings, theta: f64, phi: f64, window: Option<(f64, f64)>) -> Result<serde_json::Value, CliError> {
    let s = solve_settings(theta, phi, base, window)?;
    let chi = theta / 2.0;
    let target = su2_target(chi.cos(), chi.sin(), phi);
    let m = transfer_matrix(&s);
    Ok(json!({
        "settings": s,
        "target": { "theta": theta, "phi": phi },
        "target_matrix": target,
        "transfer_matrix": m,
        "su2_matrix": su2_matrix(&s, phi),
        "distance": phase_aligned_distance(&m, &target),
    }))
}

fn solve_cmd(run: &mut Run, a: &SolveArgs) -> Result<Box<dyn FnOnce(&Path) -> Result<(), CliError>>, CliError> {
    let base = run.device(&a.device, KappaDefault::PerMm(0.6))?;
    let theta = run.resolver.value("theta", a.theta, FRAC_PI_2)?;
    let phi = run.resolver.value("phi", a.phi, 0.0)?;
    let window = solve_window(run, a.delta_min_per_mm, a.delta_max_per_mm)?;
    let report = solve_report(&base, theta, phi, window)?;
    Ok(Box::new(move |out| write_json(out, &report)))
}

fn defects_cmd(run: &mut Run, a: &DefectsArgs) -> Result<Box<dyn FnOnce(&Path) -> Result<(), CliError>>, CliError> {
    let base = run.device(&a.device, KappaDefault::PerMm(0.6))?;
    let eps1 = run.resolver.value("eps1", a.eps1, 0.01)?;
    let eps2 = run.resolver.value("eps2", a.eps2, 0.02)?;
    let theta = run.resolver.value("theta", a.theta, FRAC_PI_2)?;
    let chi = theta / 2.0;
    let fit = best_mzi_residual(eps1, eps2, chi);
    let mzi = DefectMzi { eps1, eps2, eta: fit.eta };
    let report = json!({
        "eps1": eps1,
        "eps2": eps2,
        "theta": theta,
        "coupler_3db_1": defective_3db(eps1),
        "coupler_3db_2": defective_3db(eps2),
        "mzi_best_fit": fit,
        "mzi_diagnostic": mzi.diagnostic(),
        "first_order_bound": (eps2 - eps1).abs(),
        "exceeds_first_order": mzi.exceeds_first_order(),
        "recalibrated_coupler": solve_report(&base, theta, 0.0, None)?,
    });
    Ok(Box::new(move |out| write_json(out, &report)))
}

fn periodic(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

fn homodyne_cmd(run: &mut Run, a: &HomodyneArgs) -> Result<Box<dyn FnOnce(&Path) -> Result<(), CliError>>, CliError> {
    let state = run.state(&a.input, "coherent:4,0,0,4")?;
    let d = HomodyneConfig::default();
    let strategy: Strategy = run.resolver.value("strategy", parse_flag(&a.strategy)?, d.strategy)?;
    let seed = run.resolver.value("seed", a.seed, d.seed)?;
    let cfg = HomodyneConfig {
        strategy,
        n_samples: run.resolver.value("samples", a.samples, d.n_samples)?,
        seed,
        chi_list: periodic(run.resolver.value("chi-count", a.chi_count, d.chi_list.len())?),
        psi_list: periodic(run.resolver.value("psi-count", a.psi_count, d.psi_list.len())?),
        lo_amplitude: run.resolver.value("lo-amplitude", a.lo_amplitude, d.lo_amplitude)?,
        ..d
    };
    run.seed = Some(seed);
    let recs = run_campaign(&state, &cfg)?;
    Ok(Box::new(move |out| {
        let rows = recs.into_iter().map(|r| vec![fmt_f64(r.chi), fmt_f64(r.psi), fmt_f64(r.value)]);
        write_csv(out, &["chi", "psi", "value"], rows)
    }))
}

fn parse_optimizer(s: &str) -> Result<Optimizer, CliError> {
    match s {
        "levenberg-marquardt" | "lm" => Ok(Optimizer::LevenbergMarquardt),
        "nelder-mead" | "nm" => Ok(Optimizer::NelderMead),
        _ => Err(usage(format!("unknown optimizer {s:?}"))),
    }
}

fn read_records(path: &Path) -> Result<Vec<HomodyneRecord>, CliError> {
    let err = |source| CliError::Csv { path: path.into(), source };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    r.deserialize().collect::<Result<Vec<HomodyneRecord>, _>>().map_err(err)
}

fn reconstruct_cmd(
    run: &mut Run,
    a: &ReconstructArgs,
) -> Result<Box<dyn FnOnce(&Path) -> Result<(), CliError>>, CliError> {
    let input = run
        .resolver
        .optional("input", a.input.as_ref().map(|p| p.display().to_string()))?
        .ok_or_else(|| usage("reconstruct needs --input <records.csv>"))?;
    let method: ReconMethod = run
        .resolver
        .value("method", parse_flag(&a.method)?, ReconMethod::BackProjection)?;
    let model: FitModel = run
        .resolver
        .value("model", parse_flag(&a.model)?, FitModel::Ring)?;
    let optimizer = parse_optimizer(&run.resolver.value("optimizer", a.optimizer.clone(), "levenberg-marquardt".to_string())?)?;
    let spec = BinSpec {
        bins: run.resolver.value("bins", a.bins, 100usize)?,
        half_width: run.resolver.optional("half-width", a.half_width)?,
        ..BinSpec::default()
    };
    let path = PathBuf::from(input);
    let recs = read_records(&path)?;
    run.inputs.push(path);
    let hist = reconstruct_joint(&recs, method, &spec)?;
    let fit = fit_moments_with(&hist, model, optimizer)?;
    let report = json!({
        "method": method,
        "bins": spec.bins,
        "half_width": hist.x_edges.last().copied(),
        "n_samples": hist.n_samples,
        "fit": fit,
    });
    let fit_path_suffix = ".fit.json";
    Ok(Box::new(move |out| {
        let (xc, yc) = (hist.x_centers(), hist.y_centers());
        let rows = xc.iter().enumerate().flat_map(|(i, &x)| {
            let (yc, d) = (&yc, &hist.density);
            yc.iter().enumerate().map(move |(j, &y)| vec![fmt_f64(x), fmt_f64(y), fmt_f64(d[i * yc.len() + j])])
        });
        write_csv(out, &["e1", "e2", "density"], rows)?;
        write_json(&sibling(out, fit_path_suffix), &report)
    }))
}

fn weak_cmd(run: &mut Run, a: &WeakArgs) -> Result<Box<dyn FnOnce(&Path) -> Result<(), CliError>>, CliError> {
    let state = run.state(&a.input, "noon:2")?;
    let d = WeakConfig::default();
    let chi_count = run.resolver.value("chi-count", a.chi_count, d.chi_grid.len())?;
    if chi_count == 0 {
        return Err(usage("--chi-count must be positive"));
    }
    let p_min = run.resolver.value("p-min", a.p_min, -4.0)?;
    let p_max = run.resolver.value("p-max", a.p_max, 4.0)?;
    let p_bins = run.resolver.value("p-bins", a.p_bins, d.p_grid.len())?;
    let cfg = WeakConfig {
        gamma_w: run.resolver.value("gamma-w", a.gamma_w, d.gamma_w)?,
        chi_grid: (1..=chi_count).map(|k| -FRAC_PI_2 + k as f64 * PI / chi_count as f64).collect(),
        p_grid: linspace(p_min, p_max, p_bins),
        postselect_window: run.resolver.value("window", a.window, d.postselect_window)?,
        mask_threshold: run.resolver.value("mask", a.mask, d.mask_threshold)?,
        r_max: run.resolver.value("r-max", a.r_max, d.r_max)?,
        ..d
    };
    let surface_points = run.resolver.value("surface-points", a.surface_points, 121usize)?;
    let samples = run.resolver.optional("samples", a.samples)?;
    let scans = match samples {
        Some(n) => {
            let seed = run.resolver.value("seed", a.seed, 1u64)?;
            run.seed = Some(seed);
            weak_scan_sampled(&state, &cfg, n, seed)?
        }
        None => {
            if run.resolver.optional("seed", a.seed)?.is_some() {
                return Err(usage("--seed only applies with --samples"));
            }
            weak_scan_detailed(&state, &cfg)?
        }
    };
    let grid = linspace(-cfg.r_max, cfg.r_max, surface_points);
    let surface = assemble_joint_phase(&scans, &grid, &grid, &cfg)?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    Ok(Box::new(move |out| {
        let rows = scans.iter().flat_map(|s| &s.records).map(|r| {
            vec![
                fmt_f64(r.chi),
                fmt_f64(r.p),
                fmt_f64(r.probability),
                fmt_f64(r.meter_expectation),
                opt(r.phase),
                r.masked.to_string(),
            ]
        });
        write_csv(out, &["chi", "p", "probability", "meter_expectation", "phase", "masked"], rows)?;
        let rows = surface.cells.iter().map(|c| {
            vec![fmt_f64(c.p1), fmt_f64(c.p2), opt(c.phase), fmt_f64(c.amplitude), c.masked.to_string()]
        });
        write_csv(&sibling(out, ".surface.csv"), &["p1", "p2", "phase", "amplitude", "masked"], rows)
    }))
}

fn state_cmd(run: &mut Run, a: &StateArgs) -> Result<Box<dyn FnOnce(&Path) -> Result<(), CliError>>, CliError> {
    let state = run.state(&a.input, "noon:2")?;
    let kind = run.resolver.value("kind", a.kind.clone(), "density".to_string())?;
    if kind == "json" {
        return Ok(Box::new(move |out| write_json(out, &state)));
    }
    let axis = match run.resolver.value("axis", a.axis.clone(), "e".to_string())?.as_str() {
        "e" | "E" => Axis::E,
        "p" | "P" => Axis::P,
        other => return Err(usage(format!("unknown axis {other:?}"))),
    };
    let xs = uniform_grid(run.resolver.value("half-width", a.half_width, 6.0)?, run.resolver.value("points", a.points, 241usize)?);
    match kind.as_str() {
        "density" => {
            let mode = run.resolver.value("mode", a.mode, 0usize)?;
            let f = quadrature_density(&state, mode, axis, &xs)?;
            Ok(Box::new(move |out| {
                let p = f.probability();
                let rows = f.x.iter().zip(p).map(|(x, p)| vec![fmt_f64(*x), fmt_f64(p)]);
                write_csv(out, &["x", "p"], rows)
            }))
        }
        "joint" => {
            let f = joint_wavefunction(&state, &xs, &xs, axis)?;
            Ok(Box::new(move |out| {
                let w = f.wavefunction().unwrap_or(&[]).to_vec();
                let n = xs.len();
                let rows = (0..n * n).map(|k| {
                    let z = w[k];
                    vec![fmt_f64(xs[k / n]), fmt_f64(xs[k % n]), fmt_f64(z.re), fmt_f64(z.im)]
                });
                write_csv(out, &["x1", "x2", "re", "im"], rows)
            }))
        }
        other => Err(usage(format!("unknown kind {other:?} (density, joint or json)"))),
    }
}

pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let start = Instant::now();
    let (name, ext) = match &cli.command {
        Command::Sweep(_) => ("sweep", "csv"),
        Command::Solve(_) => ("solve", "json"),
        Command::Defects(_) => ("defects", "json"),
        Command::Homodyne(_) => ("homodyne", "csv"),
        Command::Reconstruct(_) => ("reconstruct", "csv"),
        Command::Weak(_) => ("weak", "csv"),
        Command::State(StateArgs { kind: Some(k), .. }) if k == "json" => ("state", "json"),
        Command::State(_) => ("state", "csv"),
    };
    let mut run = Run {
        name,
        resolver: Resolver::from_file(cli.config.as_deref())?,
        seed: None,
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    if let Some(c) = &cli.config {
        run.inputs.push(c.clone());
    }
    let write = match &cli.command {
        Command::Sweep(a) => sweep_cmd(&mut run, a)?,
        Command::Solve(a) => solve_cmd(&mut run, a)?,
        Command::Defects(a) => defects_cmd(&mut run, a)?,
        Command::Homodyne(a) => homodyne_cmd(&mut run, a)?,
        Command::Reconstruct(a) => reconstruct_cmd(&mut run, a)?,
        Command::Weak(a) => weak_cmd(&mut run, a)?,
        Command::State(a) => state_cmd(&mut run, a)?,
    };
    let Run { name, resolver, seed, inputs, mut outputs } = run;
    let config = resolver.finish()?;
    let out = cli.out.unwrap_or_else(|| default_out(name, ext));
    write(&out)?;
    outputs.push(out.clone());
    for extra in [".fit.json", ".surface.csv"] {
        let p = sibling(&out, extra);
        if p.exists() && matches!((name, extra), ("reconstruct", ".fit.json") | ("weak", ".surface.csv")) {
            outputs.push(p);
        }
    }
    let mpath = manifest_path(&out);
    let manifest = RunManifest {
        subcommand: name.to_string(),
        config,
        seed,
        inputs,
        outputs: outputs.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_s: start.elapsed().as_secs_f64(),
    };
    manifest.write(&mpath)?;
    outputs.push(mpath);
    Ok(outputs)
}
