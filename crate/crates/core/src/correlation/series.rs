//! Power-series extraction of the truncated two-point function.
//!
//! With `a = 1 - 4 delta^2` and `s(z) = sqrt(1 - a z^2)` (principal branch,
//! `s(0) = 1`), the generating function `G(z) = sum_k g(k) z^k` is
//!
//! ```text
//! G(z) = z (s(z) - 2 delta)^2 / (4 (z - 1) (z + 1)^2).
//! ```
//!
//! Expanding the square gives the numerator `z [(1 + 4 delta^2) - a z^2 -
//! 4 delta s(z)]`, whose coefficients follow from the binomial series of
//! `s`. The denominator is `4 (z^3 + z^2 - z - 1)`, so matching coefficients
//! in `D G = N` yields
//!
//! ```text
//! g(k) = g(k-3) + g(k-2) - g(k-1) - N_k / 4.
//! ```
//!
//! The homogeneous part has a double root at `-1`, so rounding errors grow
//! linearly in `k`; the recurrence therefore runs in double-word arithmetic.
//! At `delta = 0` the numerator is `z (1 - z^2)` and `g(k) = (-1)^k / 4`.

use std::io::Write;

use crate::error::{check_delta, FepError, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Unevaluated sum `hi + lo`.
#[derive(Debug, Clone)]
struct Pair<T> {
    hi: T,
    lo: T,
}

impl<T: Scalar> Pair<T> {
    fn zero() -> Self {
        Self { hi: T::zero(), lo: T::zero() }
    }

    fn of(x: T) -> Self {
        Self { hi: x, lo: T::zero() }
    }

    fn add(&self, other: &Self) -> Self {
        let (s, e) = T::two_sum(&self.hi, &other.hi);
        let e = e + self.lo.clone() + other.lo.clone();
        let (hi, lo) = T::two_sum(&s, &e);
        Self { hi, lo }
    }

    fn neg(&self) -> Self {
        Self { hi: -self.hi.clone(), lo: -self.lo.clone() }
    }

    fn value(&self) -> T {
        self.hi.clone() + self.lo.clone()
    }
}

/// Table of `g(k)`, `k = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable<T> {
    delta: T,
    g: Vec<T>,
    zstar: f64,
}

/// Coefficients `N_0..=N_K` of the numerator.
fn numerator<T: Scalar>(delta: &T, max_lag: usize) -> Vec<T> {
    let one = T::one();
    let four = T::from_int(4);
    let d2 = delta.clone() * delta.clone();
    let a = one.clone() - four.clone() * d2.clone();
    let mut n = vec![T::zero(); max_lag + 1];
    // M(w) = (1 + 4 delta^2) - a w^2 - 4 delta s(w), N_k = M_{k-1}
    let two_delta = T::from_int(2) * delta.clone();
    let m0 = (one.clone() - two_delta.clone()) * (one.clone() - two_delta.clone());
    if max_lag >= 1 {
        n[1] = m0;
    }
    // c_n = binom(1/2, n) (-a)^n, c_1 = -a / 2
    let mut c = -(a.clone() / T::from_int(2));
    if max_lag >= 3 {
        n[3] = -(a.clone()) - four.clone() * delta.clone() * c.clone();
    }
    let mut j = 2i64;
    while (2 * j + 1) as usize <= max_lag {
        c = c * a.clone() * T::ratio(2 * j - 3, 2 * j);
        n[(2 * j + 1) as usize] = -(four.clone() * delta.clone() * c.clone());
        j += 1;
    }
    n
}

/// `g(1..=K)` by truncated power-series long division.
pub fn correlations_by_series<T: Scalar>(delta: T, max_lag: usize) -> Result<CorrelationTable<T>> {
    check_delta(delta.lossy_f64())?;
    if max_lag == 0 {
        return Err(FepError::InvalidArgument("need at least one lag".into()));
    }
    let n = numerator(&delta, max_lag);
    let quarter = T::ratio(1, 4);
    // g_{-2}, g_{-1}, g_0 are zero
    let mut hist: [Pair<T>; 3] = [Pair::zero(), Pair::zero(), Pair::zero()];
    let mut g = Vec::with_capacity(max_lag);
    for nk in n.iter().skip(1) {
        let [g3, g2, g1] = &hist;
        let next = g3.add(g2).add(&g1.neg()).add(&Pair::of(-(nk.clone() * quarter.clone())));
        g.push(next.value());
        hist = [hist[1].clone(), hist[2].clone(), next];
    }
    let d = delta.lossy_f64();
    let zstar = 1.0 / (1.0 - 4.0 * d * d).sqrt();
    Ok(CorrelationTable { delta, g, zstar })
}

impl<T: Scalar> CorrelationTable<T> {
    pub fn delta(&self) -> &T {
        &self.delta
    }

    pub fn rho(&self) -> T {
        T::ratio(1, 2) - self.delta.clone()
    }

    /// Largest tabulated lag `K`.
    pub fn max_lag(&self) -> usize {
        self.g.len()
    }

    /// `z_* = (1 - 4 delta^2)^{-1/2}`, the branch point of the numerator.
    pub fn zstar(&self) -> f64 {
        self.zstar
    }

    /// `g(k)` for `1 <= k <= K`.
    pub fn g(&self, k: usize) -> T {
        assert!(k >= 1 && k <= self.g.len(), "lag {k} outside 1..={}", self.g.len());
        self.g[k - 1].clone()
    }

    pub fn values(&self) -> &[T] {
        &self.g
    }

    /// `g(2n + 1) + g(2n + 2)` for every complete pair in the table.
    pub fn paired_residuals(&self) -> Vec<T> {
        self.g.chunks_exact(2).map(|p| p[0].clone() + p[1].clone()).collect()
    }

    /// `rho^2 (1 - 4 delta^2)^j - |g(2j + 1)|` for every odd lag.
    pub fn bound_margins(&self) -> Vec<T> {
        let rho = self.rho();
        let a = T::one() - T::from_int(4) * self.delta.clone() * self.delta.clone();
        let mut bound = rho.clone() * rho;
        self.g
            .iter()
            .step_by(2)
            .map(|gk| {
                let m = bound.clone() - gk.abs();
                bound = bound.clone() * a.clone();
                m
            })
            .collect()
    }

    fn check_length(&self, length: usize) -> Result<()> {
        if length == 0 {
            return Err(FepError::InvalidArgument("window length must be >= 1".into()));
        }
        if length - 1 > self.g.len() {
            return Err(FepError::TableTooShort { have: self.g.len(), need: length - 1 });
        }
        Ok(())
    }

    /// `rho (1 - rho) L + 2 sum_{k odd, k <= L-1} g(k)`.
    pub fn variance_reduced(&self, length: usize) -> Result<T> {
        self.check_length(length)?;
        let rho = self.rho();
        let mut acc = CompensatedSum::default();
        acc.add(&(rho.clone() * (T::one() - rho) * T::from_int(length as i64)));
        for k in (1..length).step_by(2) {
            acc.add(&(T::from_int(2) * self.g[k - 1].clone()));
        }
        Ok(acc.value())
    }

    /// `rho (1 - rho) L + 2 sum_{k=1}^{L-1} (L - k) g(k)`.
    pub fn variance_double_sum(&self, length: usize) -> Result<T> {
        self.check_length(length)?;
        let rho = self.rho();
        let mut acc = CompensatedSum::default();
        acc.add(&(rho.clone() * (T::one() - rho) * T::from_int(length as i64)));
        for k in 1..length {
            acc.add(&(T::from_int(2 * (length - k) as i64) * self.g[k - 1].clone()));
        }
        Ok(acc.value())
    }

    /// Number variance of a window of `length` sites. Both forms are
    /// evaluated and must agree to `1e-9` relative (absolute below 1).
    pub fn variance(&self, length: usize) -> Result<T> {
        let reduced = self.variance_reduced(length)?;
        let full = self.variance_double_sum(length)?;
        let (r, f) = (reduced.lossy_f64(), full.lossy_f64());
        if (r - f).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(FepError::Numerical(format!(
                "variance forms disagree at L = {length}: {r} vs {f}"
            )));
        }
        Ok(reduced)
    }

    /// CSV with columns `k, g, paired_residual, bound_margin`; the last two
    /// are filled on odd rows only.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,g,paired_residual,bound_margin")?;
        let pairs = self.paired_residuals();
        let margins = self.bound_margins();
        for (i, gk) in self.g.iter().enumerate() {
            let k = i + 1;
            let (pair, margin) = if k % 2 == 1 {
                (
                    pairs.get(i / 2).map(|p| format!("{:e}", p.lossy_f64())).unwrap_or_default(),
                    format!("{:e}", margins[i / 2].lossy_f64()),
                )
            } else {
                (String::new(), String::new())
            };
            writeln!(w, "{k},{:e},{pair},{margin}", gk.lossy_f64())?;
        }
        Ok(())
    }
}

/// Number variance `V(L)` from a fresh table of `L - 1` lags.
pub fn exact_variance<T: Scalar>(delta: T, length: usize) -> Result<T> {
    if length == 0 {
        return Err(FepError::InvalidArgument("window length must be >= 1".into()));
    }
    correlations_by_series(delta, length.saturating_sub(1).max(1))?.variance(length)
}
