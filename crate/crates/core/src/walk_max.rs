//! Maximum of a simple symmetric random walk.
//!
//! Under the conditioned limit measure at `delta = 0` the gap `Y = 2X + 1` is
//! the first passage time of a simple walk to level 1, so the renewal count in
//! `J_L` has the law of `M(L) = max_{l <= L} W_l`. The reflection principle
//! gives `P(M(L) = n) = P(W_L = n)` if `L - n` is even and `P(W_L = n + 1)`
//! otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use statrs::function::erf::erf;

use crate::error::{FepError, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// `P(W_L = 2k - L)` for `k = 0..=L` (number of up-steps `k`).
///
/// Weights are built outward from the centre by binomial ratios and then
/// normalized by their sum, so no `2^-L` underflow occurs; exact for
/// rational `T`.
pub fn walk_position_pmf<T: Scalar>(steps: usize) -> Vec<T> {
    let n = steps as i64;
    let centre = steps / 2;
    let mut w = vec![T::zero(); steps + 1];
    w[centre] = T::one();
    for k in centre..steps {
        let kk = k as i64;
        w[k + 1] = w[k].clone() * T::ratio(n - kk, kk + 1);
    }
    for k in (1..=centre).rev() {
        let kk = k as i64;
        w[k - 1] = w[k].clone() * T::ratio(kk, n - kk + 1);
    }
    let mut total = CompensatedSum::default();
    for x in &w {
        total.add(x);
    }
    let total = total.value();
    w.into_iter().map(|x| x / total.clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkMaxLaw<T> {
    steps: usize,
    pmf: Vec<T>,
}

impl<T: Scalar> WalkMaxLaw<T> {
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `P(M(L) = n)` for `n = 0..=L`.
    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    pub fn prob(&self, n: usize) -> T {
        self.pmf.get(n).cloned().unwrap_or_else(T::zero)
    }

    pub fn second_moment(&self) -> T {
        let mut acc = CompensatedSum::default();
        for (n, p) in self.pmf.iter().enumerate() {
            let n = T::from_int(n as i64);
            acc.add(&(n.clone() * n * p.clone()));
        }
        acc.value()
    }

    pub fn cdf(&self) -> Vec<T> {
        let mut acc = CompensatedSum::default();
        self.pmf
            .iter()
            .map(|p| {
                acc.add(p);
                acc.value()
            })
            .collect()
    }
}

/// Law of `M(L)` by the reflection identity.
pub fn walk_max_pmf<T: Scalar>(steps: usize) -> Result<WalkMaxLaw<T>> {
    if steps == 0 {
        return Err(FepError::InvalidArgument("walk length must be >= 1".into()));
    }
    let pos = walk_position_pmf::<T>(steps);
    // P(W_L = m), m = 2k - L
    let at = |m: usize| -> T {
        if m > steps || (steps - m) % 2 == 1 {
            T::zero()
        } else {
            pos[(steps + m) / 2].clone()
        }
    };
    let pmf = (0..=steps)
        .map(|n| if (steps - n).is_multiple_of(2) { at(n) } else { at(n + 1) })
        .collect();
    Ok(WalkMaxLaw { steps, pmf })
}

/// Exhaustive enumeration of all `2^L` walks, `L <= 20`.
pub fn walk_max_bruteforce(steps: usize) -> Result<WalkMaxLaw<BigRational>> {
    if steps > 20 {
        return Err(FepError::BruteForceTooLong(steps));
    }
    if steps == 0 {
        return Err(FepError::InvalidArgument("walk length must be >= 1".into()));
    }
    let mut counts = vec![0u64; steps + 1];
    for path in 0u32..(1u32 << steps) {
        let mut w = 0i32;
        let mut max = 0i32;
        for s in 0..steps {
            w += if (path >> s) & 1 == 1 { 1 } else { -1 };
            max = max.max(w);
        }
        counts[max as usize] += 1;
    }
    let denom = BigInt::from(1u64 << steps);
    let pmf = counts
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), denom.clone()))
        .collect();
    Ok(WalkMaxLaw { steps, pmf })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoment<T> {
    /// `sum n^2 P(M(L) = n)`.
    pub direct: T,
    /// `E W_L^2 - E|W_L| + (1 - P(W_L = 0)) / 2`, odd `L` only.
    pub closed_form: Option<T>,
}

impl<T: Scalar> SecondMoment<T> {
    pub fn value(&self) -> T {
        self.closed_form.clone().unwrap_or_else(|| self.direct.clone())
    }
}

/// `E[M(L)^2]`, by direct summation and (odd `L`) by the closed form.
pub fn walk_max_second_moment<T: Scalar>(steps: usize) -> Result<SecondMoment<T>> {
    let law = walk_max_pmf::<T>(steps)?;
    let direct = law.second_moment();
    let closed_form = (steps % 2 == 1).then(|| {
        let pos = walk_position_pmf::<T>(steps);
        let mut abs_mean = CompensatedSum::default();
        for (k, p) in pos.iter().enumerate() {
            let m = (2 * k as i64 - steps as i64).abs();
            abs_mean.add(&(T::from_int(m) * p.clone()));
        }
        // P(W_L = 0) = 0 for odd L
        T::from_int(steps as i64) - abs_mean.value() + T::ratio(1, 2)
    });
    Ok(SecondMoment { direct, closed_form })
}

/// Kolmogorov-Smirnov distance between the law of `M(L) / sqrt(L)` and the
/// half-normal law `P(|Z| <= x) = erf(x / sqrt 2)`.
pub fn half_normal_distance(steps: usize) -> Result<f64> {
    let law = walk_max_pmf::<f64>(steps)?;
    let cdf = law.cdf();
    let scale = (steps as f64).sqrt();
    let mut worst = 0.0f64;
    let mut below = 0.0f64;
    for (n, &c) in cdf.iter().enumerate() {
        let h = erf(n as f64 / scale / std::f64::consts::SQRT_2);
        worst = worst.max((h - below).abs()).max((c - h).abs());
        below = c;
    }
    Ok(worst.min(1.0))
}
