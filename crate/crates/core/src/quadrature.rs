//! Quadrature building blocks: Gauss–Legendre rules and a deterministic
//! midpoint rule on the torus 𝕋² = [−π, π)².

use std::f64::consts::PI;
use std::ops::Add;

use rayon::prelude::*;

use crate::spectral::Wavenumber;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
///
/// Roots are found by Newton iteration on the three-term recurrence,
/// starting from the Tricomi approximation.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto `[lo, hi]`.
pub fn gauss_legendre_on(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    x.iter()
        .zip(&w)
        .map(|(&x, &w)| (mid + half * x, half * w))
        .collect()
}

/// The `j`-th midpoint of an `n`-point grid on `[−π, π)`.
pub fn midpoint(n: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * (j as f64 + 0.5) / n as f64
}

/// Sum of `f` over the `n × n` midpoint grid of 𝕋².
///
/// Rows are summed in parallel, each row sequentially, and the row totals
/// are then added in row order, so the result does not depend on the
/// thread schedule.
pub fn torus_sum<T, F>(n: usize, f: F) -> T
where
    T: Add<Output = T> + Default + Send,
    F: Fn(Wavenumber) -> T + Sync,
{
    let rows: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let k1 = midpoint(n, i);
            (0..n).fold(T::default(), |acc, j| {
                acc + f(Wavenumber::new(k1, midpoint(n, j)))
            })
        })
        .collect();
    rows.into_iter().fold(T::default(), |acc, r| acc + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // ∫ x^{2n−2} dx over [−1, 1] = 2 / (2n − 1)
            let p = 2 * n - 2;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
            assert!((got - 2.0 / (p as f64 + 1.0)).abs() < 1e-12, "n = {n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn mapped_rule() {
        let rule = gauss_legendre_on(12, 0.0, PI);
        let got: f64 = rule.iter().map(|(x, w)| w * x.sin()).sum();
        assert!((got - 2.0).abs() < 1e-13);
    }

    #[test]
    fn torus_mean_of_trig_polynomial() {
        let n = 16;
        let total: f64 = torus_sum(n, |k| 1.0 + (k.k1 + 2.0 * k.k2).cos());
        assert!((total / (n * n) as f64 - 1.0).abs() < 1e-14);
    }
}
