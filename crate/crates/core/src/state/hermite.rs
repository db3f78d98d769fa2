use std::f64::consts::PI;

/// `ψ₀ … ψ_nmax` at `x`, by upward recurrence on the normalized functions:
/// `ψ₀ = (2/π)^{1/4} e^{−x²}`, `ψ_{n+1} = (2x ψₙ − √n ψ_{n−1}) / √(n+1)`.
pub fn hermite_table(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let p0 = (2.0 / PI).powf(0.25) * (-x * x).exp();
    out.push(p0);
    if nmax == 0 {
        return out;
    }
    out.push(2.0 * x * p0);
    for n in 1..nmax {
        let next = (2.0 * x * out[n] - (n as f64).sqrt() * out[n - 1]) / ((n + 1) as f64).sqrt();
        out.push(next);
    }
    out
}

/// `n`-th orthonormal Hermite-Gaussian at `x`.
pub fn hermite_psi(n: usize, x: f64) -> f64 {
    hermite_table(n, x)[n]
}

/// Table indexed `[n][i]` for every grid point `xs[i]`.
pub fn hermite_table_grid(nmax: usize, xs: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; xs.len()]; nmax + 1];
    for (i, &x) in xs.iter().enumerate() {
        for (n, v) in hermite_table(nmax, x).into_iter().enumerate() {
            out[n][i] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::gauss_legendre;

    #[test]
    fn ground_state_peak() {
        assert!((hermite_psi(0, 0.0) - 0.8932438417380023).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_up_to_twenty() {
        let (x, w) = gauss_legendre(400, -9.0, 9.0);
        let tab = hermite_table_grid(20, &x);
        for m in 0..=20 {
            for n in 0..=20 {
                let s: f64 = (0..x.len()).map(|i| w[i] * tab[m][i] * tab[n][i]).sum();
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "({m},{n}): {s}");
            }
        }
    }

    #[test]
    fn second_moment() {
        let (x, w) = gauss_legendre(400, -10.0, 10.0);
        let tab = hermite_table_grid(30, &x);
        for n in 0..=30 {
            let s: f64 = (0..x.len()).map(|i| w[i] * x[i] * x[i] * tab[n][i].powi(2)).sum();
            assert!((s - (2 * n + 1) as f64 / 4.0).abs() < 1e-8, "{n}: {s}");
        }
    }

    #[test]
    fn stable_at_sixty() {
        let (x, w) = gauss_legendre(600, -12.0, 12.0);
        let tab = hermite_table_grid(60, &x);
        let s: f64 = (0..x.len()).map(|i| w[i] * tab[60][i].powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-10, "{s}");
    }
}
