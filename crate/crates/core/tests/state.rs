use std::f64::consts::PI;

use qcoupler_core::numeric::linspace;
use qcoupler_core::state::*;
use qcoupler_core::C64;

// mpmath, 50 digits: (2/π)^¼ / √(2ⁿ n!) · Hₙ(√2 x) · e^{−x²}
const HERMITE_FROZEN: [(usize, [f64; 4]); 7] = [
    (0, [0.0045035213034883585, 0.89324384173800233, 0.54722475389138758, 5.9896308867309741e-5]),
    (1, [-0.020716197996046449, 0.0, 0.76611465544794261, 0.00037135711497732039]),
    (5, [-0.4749468416212537, 0.0, -0.053039750392810825, 0.037569242564292959]),
    (10, [-0.28820203233123634, -0.44311894975850463, 0.092898395480719174, 0.53412108277222368]),
    (20, [0.20155387226312111, 0.37494653945774456, 0.37703424216042439, 0.37011104430028708]),
    (40, [-0.30758388764029977, 0.31627730874803716, -0.27325370229365472, 0.33519037339052105]),
    (60, [-0.22494499334405572, 0.28608659618881627, -0.034505316730228423, -0.29234025057651665]),
];
const HERMITE_X: [f64; 4] = [-2.3, 0.0, 0.7, 3.1];

#[test]
fn hermite_functions_match_frozen_values() {
    for (n, row) in HERMITE_FROZEN {
        for (x, want) in HERMITE_X.iter().zip(row) {
            let got = hermite_psi(n, *x);
            assert!((got - want).abs() < 1e-10, "n={n} x={x}: {got} vs {want}");
        }
    }
}

fn fourier_1d(xs: &[f64], f: &[C64], p: f64) -> C64 {
    let h = xs[1] - xs[0];
    let s: C64 = xs.iter().zip(f).map(|(&x, v)| v * C64::from_polar(1.0, -2.0 * p * x)).sum();
    s * h / PI.sqrt()
}

#[test]
fn momentum_eigenfunctions_are_fourier_transforms() {
    let xs = linspace(-9.0, 9.0, 3601);
    let ps = linspace(-3.0, 3.0, 25);
    let alpha = coherent_state(C64::new(1.0, -0.5), 30).unwrap();
    let mut fock3 = vec![C64::new(0.0, 0.0); 6];
    fock3[3] = C64::new(1.0, 0.0);
    let mix = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.8)];
    for amps in [alpha, fock3, mix] {
        let e = mode_wavefunction(&amps, Axis::E, &xs);
        let p = mode_wavefunction(&amps, Axis::P, &ps);
        for (k, &pk) in ps.iter().enumerate() {
            let ft = fourier_1d(&xs, &e, pk);
            assert!((ft - p[k]).norm() < 1e-6, "p={pk}: {ft} vs {}", p[k]);
        }
    }
}

fn raw_joint(s: &FockState, axis: Axis, a: &[f64], b: &[f64]) -> Vec<C64> {
    let d = s.dim();
    let (fa, fb) = (eigenfunctions(axis, d - 1, a), eigenfunctions(axis, d - 1, b));
    let mut out = vec![C64::new(0.0, 0.0); a.len() * b.len()];
    for m in 0..d {
        for n in 0..d {
            let c = s.get(&[m, n]);
            if c.norm() == 0.0 {
                continue;
            }
            for i in 0..a.len() {
                for j in 0..b.len() {
                    out[i * b.len() + j] += c * fa[m][i] * fb[n][j];
                }
            }
        }
    }
    out
}

#[test]
fn joint_momentum_wavefunction_is_2d_fourier_transform() {
    let s = noon2();
    let xs = linspace(-6.0, 6.0, 601);
    let h = xs[1] - xs[0];
    let e = raw_joint(&s, Axis::E, &xs, &xs);
    let ps = linspace(-2.0, 2.0, 9);
    let p = raw_joint(&s, Axis::P, &ps, &ps);
    let phase = |q: f64| -> Vec<C64> { xs.iter().map(|&x| C64::from_polar(1.0, -2.0 * q * x)).collect() };
    for (i, &p1) in ps.iter().enumerate() {
        let k1 = phase(p1);
        for (j, &p2) in ps.iter().enumerate() {
            let k2 = phase(p2);
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..xs.len() {
                let row: C64 = (0..xs.len()).map(|b| e[a * xs.len() + b] * k2[b]).sum();
                acc += row * k1[a];
            }
            let ft = acc * h * h / PI;
            assert!((ft - p[i * ps.len() + j]).norm() < 1e-6, "({p1}, {p2})");
        }
    }
}

#[test]
fn noon_moduli_agree_between_domains() {
    let g = linspace(-4.0, 4.0, 81);
    let e = joint_wavefunction(&noon2(), &g, &g, Axis::E).unwrap();
    let p = joint_wavefunction(&noon2(), &g, &g, Axis::P).unwrap();
    for (a, b) in e.amplitude().iter().zip(p.amplitude()) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn rotation_group_property_at_large_cutoff() {
    let cutoff = coherent_cutoff(4.0);
    assert_eq!(cutoff, 60);
    let s = FockState::coherent_product(&[C64::new(4.0, 0.0), C64::new(0.0, 4.0)], cutoff).unwrap();
    for (a, b) in [(0.3, 0.5), (1.1, -0.4), (2.0, 2.5)] {
        let two = s.apply_rotation(a, 1.0).unwrap().apply_rotation(b, 1.0).unwrap();
        let one = s.apply_rotation(a + b, 1.0).unwrap();
        assert!(one.fidelity(&two) > 1.0 - 1e-9);
        // coherent products stay coherent: slot amplitudes rotate like the mode vector
        let (sn, cs) = (a + b).sin_cos();
        let (x, y) = (C64::new(4.0, 0.0), C64::new(0.0, 4.0));
        let want = FockState::coherent_product(&[x * cs + y * sn, -x * sn + y * cs], cutoff).unwrap();
        assert!(one.fidelity(&want) > 1.0 - 1e-9, "{}", one.fidelity(&want));
    }
}

#[test]
fn quadrature_density_detects_narrow_grid() {
    let s = FockState::coherent_product(&[C64::new(4.0, 0.0), C64::new(0.0, 0.0)], 60).unwrap();
    assert!(matches!(
        quadrature_density(&s, 0, Axis::E, &linspace(-2.0, 2.0, 81)),
        Err(StateError::GridTooNarrow { .. })
    ));
    let f = quadrature_density(&s, 0, Axis::E, &linspace(-3.0, 11.0, 701)).unwrap();
    let mean: f64 = f.x.iter().zip(f.density().unwrap()).map(|(x, p)| x * p).sum::<f64>() * (f.x[1] - f.x[0]);
    assert!((mean - 4.0).abs() < 1e-6);
}
