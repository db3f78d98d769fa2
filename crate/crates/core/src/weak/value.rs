use num_complex::Complex64 as C64;

use super::WeakError;
use crate::state::FockState;

/// `A_w = ⟨post|A|pre⟩ / ⟨post|pre⟩` for a matrix `op` (row-major rows).
pub fn weak_value(op: &[Vec<C64>], pre: &[C64], post: &[C64]) -> Result<C64, WeakError> {
    let d = pre.len();
    if post.len() != d || op.len() != d || op.iter().any(|r| r.len() != d) {
        return Err(WeakError::InvalidConfig("operator and states must share one dimension".into()));
    }
    let overlap: C64 = post.iter().zip(pre).map(|(b, a)| b.conj() * a).sum();
    if overlap.norm() <= 1e-12 {
        return Err(WeakError::OrthogonalPostselection { overlap: overlap.norm() });
    }
    let num: C64 = (0..d)
        .map(|i| post[i].conj() * op[i].iter().zip(pre).map(|(a, x)| a * x).sum::<C64>())
        .sum();
    Ok(num / overlap)
}

/// Append a vacuum meter (last mode) and mix it with mode 0 by the coupler
/// rotation `[[cos Γ, −sin Γ], [sin Γ, cos Γ]]`.
///
/// The meter then holds `sin²Γ·⟨n₀⟩` photons on average.
pub fn weak_couple(signal: &FockState, gamma_w: f64) -> Result<FockState, WeakError> {
    if !gamma_w.is_finite() {
        return Err(WeakError::InvalidConfig(format!("gamma_w = {gamma_w}")));
    }
    let joint = signal.with_vacuum_mode();
    let meter = joint.modes() - 1;
    Ok(joint.rotate_modes(0, meter, gamma_w, -1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::noon2;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn same_pre_and_post_gives_expectation() {
        let op = vec![vec![c(1.0), C64::new(0.0, 2.0)], vec![C64::new(0.0, -2.0), c(-1.0)]];
        let psi = [c(0.6), C64::new(0.0, 0.8)];
        let w = weak_value(&op, &psi, &psi).unwrap();
        let exp: C64 = (0..2).map(|i| psi[i].conj() * (op[i][0] * psi[0] + op[i][1] * psi[1])).sum();
        assert!((w - exp).norm() < 1e-15);
        let id = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]];
        assert!((weak_value(&id, &psi, &[c(1.0), c(0.3)]).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn anomalous_projector_value() {
        // ⟨−|Π₁|+⟩ / ⟨−|+⟩ with ⟨−|+⟩ = 0 is orthogonal; tilt the postselection slightly
        let proj = vec![vec![c(0.0), c(0.0)], vec![c(0.0), c(1.0)]];
        let plus = [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)];
        let minus = [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)];
        assert!(matches!(weak_value(&proj, &plus, &minus), Err(WeakError::OrthogonalPostselection { .. })));
        let (s, co) = (0.7f64).sin_cos();
        let post = [c(co), c(-s)];
        let w = weak_value(&proj, &plus, &post).unwrap();
        // brute force: ⟨post|Π₁|plus⟩ = −s/√2, ⟨post|plus⟩ = (co − s)/√2
        assert!((w - c(-s / (co - s))).norm() < 1e-14);
        assert!(w.re < 0.0);
    }

    #[test]
    fn coupling_preserves_norm_and_excites_meter() {
        let s = noon2();
        assert_eq!(weak_couple(&s, 0.0).unwrap(), s.with_vacuum_mode());
        for g in [0.1, 0.05] {
            let j = weak_couple(&s, g).unwrap();
            assert!((j.norm_sqr() - 1.0).abs() < 1e-9);
            let n_sig = s.mean_photon_number(0);
            let got = j.mean_photon_number(2);
            assert!((got - g * g * n_sig).abs() < g.powi(4) * n_sig, "{got}");
        }
    }
}
