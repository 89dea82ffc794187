//! Odd-lag correlations from the integral representation
//!
//! ```text
//! g(k) = -(2 delta / (pi z_*)) int_{z_*}^inf sqrt(z^2 - z_*^2) / (z^k (z^2 - 1)^2) dz,
//! ```
//!
//! evaluated after `z = z_* cosh t`:
//!
//! ```text
//! g(k) = -(2 delta z_* / pi) int_0^inf sinh^2 t / ((z_* cosh t)^k (z_*^2 cosh^2 t - 1)^2) dt.
//! ```
//!
//! The integrand decays like `exp(-(k + 2) t)` and has poles at distance
//! about `2 delta` from the real axis near `t = 0`, so uniform Gauss-Legendre
//! panels are refined by doubling until successive values settle.

use crate::error::{check_delta, FepError, Result};
use crate::scalar::Real;

const NODES: usize = 20;
const MAX_PANELS: usize = 1 << 20;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre<T: Real>(m: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); m];
    let mut w = vec![T::zero(); m];
    let mf = T::of(m as f64);
    for i in 0..m.div_ceil(2) {
        let mut z = (T::PI() * (T::of(i as f64) + T::of(0.75)) / (mf + T::of(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), z);
            for j in 2..=m {
                let jf = T::of(j as f64);
                let p2 = ((T::of(2.0) * jf - T::one()) * z * p1 - (jf - T::one()) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (z * p1 - p0) / (z * z - T::one());
            let step = p1 / dp;
            z = z - step;
            if step.abs() <= T::epsilon() * T::of(4.0) {
                break;
            }
        }
        let wt = T::of(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wt;
        w[m - 1 - i] = wt;
    }
    (x, w)
}

fn panel_sum<T: Real, F: Fn(T) -> T>(f: &F, upper: T, panels: usize, x: &[T], w: &[T]) -> T {
    let h = upper / T::of(panels as f64);
    let half = h / T::of(2.0);
    let mut acc = T::zero();
    for p in 0..panels {
        let mid = h * T::of(p as f64) + half;
        let mut s = T::zero();
        for (xi, wi) in x.iter().zip(w) {
            s = s + *wi * f(mid + half * *xi);
        }
        acc = acc + s * half;
    }
    acc
}

/// `g(k)` for odd `k` from the integral representation.
pub fn correlation_by_integral<T: Real>(delta: T, k: usize) -> Result<T> {
    check_delta(delta.lossy_f64())?;
    if delta <= T::zero() {
        return Err(FepError::DeltaZero { op: "integral representation" });
    }
    if k.is_multiple_of(2) {
        return Err(FepError::EvenLag(k));
    }
    let zstar = T::one() / (T::one() - T::of(4.0) * delta * delta).sqrt();
    let zs2 = zstar * zstar;
    let kk = k as i32;
    let f = |t: T| {
        let c = t.cosh();
        let s = t.sinh();
        let d = zs2 * c * c - T::one();
        s * s / ((zstar * c).powi(kk) * d * d)
    };
    // beyond `upper` the integrand is below exp(-40) times its scale
    let upper = T::of((40.0 + 4f64.ln()) / (k as f64 + 2.0) + 1.0);
    let (x, w) = gauss_legendre::<T>(NODES);
    let scale = -(T::of(2.0) * delta * zstar) / T::PI();
    let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0));
    // start with panels no wider than the near-axis pole distance
    let width = (T::of(2.0) * delta).min(T::one());
    let mut panels = (upper / width).ceil().to_usize().unwrap_or(1).clamp(4, MAX_PANELS);
    let mut prev = scale * panel_sum(&f, upper, panels, &x, &w);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = scale * panel_sum(&f, upper, panels, &x, &w);
        if (next - prev).abs() < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(FepError::Numerical(format!("quadrature did not settle for delta {}, k {k}", delta.lossy_f64())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::correlations_by_series;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre::<f64>(NODES);
        let sw: f64 = w.iter().sum();
        assert!((sw - 2.0).abs() < 1e-14);
        // exact up to degree 2m - 1
        for deg in [2, 10, 38] {
            let s: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "deg {deg}");
        }
        let (x1, w1) = gauss_legendre::<f64>(1);
        assert_eq!((x1[0], w1[0]), (0.0, 2.0));
    }

    #[test]
    fn first_lag() {
        let g = correlation_by_integral(0.05f64, 1).unwrap();
        assert!((g + 0.2025).abs() < 1e-8, "{g}");
    }

    #[test]
    fn agrees_with_series() {
        for d in [0.05f64, 0.1] {
            let t = correlations_by_series(d, 101).unwrap();
            for k in (1..=101).step_by(2) {
                let gi = correlation_by_integral(d, k).unwrap();
                assert!((gi - t.g(k)).abs() < 1e-8, "d {d} k {k}: {gi} vs {}", t.g(k));
            }
        }
    }

    #[test]
    fn bounded_and_negative() {
        let g3 = correlation_by_integral(0.1f64, 3).unwrap();
        assert!(g3 < 0.0 && g3.abs() <= 0.16 * 0.96);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(correlation_by_integral(0.0f64, 3), Err(FepError::DeltaZero { .. })));
        assert!(matches!(correlation_by_integral(0.1f64, 4), Err(FepError::EvenLag(4))));
    }

    #[test]
    fn single_precision() {
        let g = correlation_by_integral(0.1f32, 1).unwrap();
        assert!((g + 0.16).abs() < 1e-5);
    }
}
