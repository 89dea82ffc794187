//! The gap law between renewal events of the frozen measure.
//!
//! Under the measure conditioned on a renewal at the origin the blocks
//! `(10)^X` separating consecutive renewals are i.i.d. with
//! `P(X = n) = C_n rho^n (1 - rho)^(n + 1)`, `rho = 1/2 - delta`, and the
//! distance between renewals is `Y = 2X + 1`.

use rand::Rng;

use crate::error::{check_delta, FepError, Result};
use crate::scalar::{Real, Scalar};

pub const DEFAULT_TABLE_CAP: usize = 100_000_000;

/// Remaining tail mass below which a sampler may stop extending its table.
const NEGLIGIBLE_TAIL: f64 = 1e-17;

/// The first `count` probabilities `P(X = n)`, by the Catalan ratio
/// recurrence `p_{n+1} = p_n rho (1 - rho) 2(2n + 1) / (n + 2)`.
///
/// Exact when `T` is a rational type.
pub fn gap_pmf_terms<T: Scalar>(delta: &T, count: usize) -> Vec<T> {
    let half = T::ratio(1, 2);
    let rho = half.clone() - delta.clone();
    let q = rho.clone() * (T::one() - rho.clone());
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let mut p = T::one() - rho;
    out.push(p.clone());
    for n in 1..count {
        let k = (n - 1) as i64;
        p = p * q.clone() * T::ratio(2 * (2 * k + 1), k + 2);
        out.push(p.clone());
    }
    out
}

/// Growable pmf/cdf table of the gap variable `X`.
#[derive(Debug, Clone)]
pub struct GapLaw<T: Real> {
    delta: T,
    rho: T,
    pmf: Vec<T>,
    cdf: Vec<T>,
    // compensated running sum: cdf[n] = hi[n] + lo[n]
    hi: Vec<T>,
    lo: Vec<T>,
    cap: usize,
}

impl<T: Real> GapLaw<T> {
    pub fn new(delta: T) -> Result<Self> {
        Self::with_cap(delta, DEFAULT_TABLE_CAP)
    }

    pub fn with_cap(delta: T, cap: usize) -> Result<Self> {
        check_delta(delta.lossy_f64())?;
        let rho = T::of(0.5) - delta;
        let p0 = T::one() - rho;
        Ok(Self {
            delta,
            rho,
            pmf: vec![p0],
            cdf: vec![p0],
            hi: vec![p0],
            lo: vec![T::zero()],
            cap: cap.max(1),
        })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn pmf_table(&self) -> &[T] {
        &self.pmf
    }

    pub fn cdf_table(&self) -> &[T] {
        &self.cdf
    }

    /// Makes sure `pmf[n]` is tabulated.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        if n < self.pmf.len() {
            return Ok(());
        }
        if n >= self.cap {
            return Err(FepError::TableCapExceeded { cap: self.cap });
        }
        // rho (1 - rho) as an unevaluated sum, so its rounding does not
        // compound geometrically along the table
        let q = self.rho * (T::one() - self.rho);
        let q_lo = self.rho.mul_add(T::one() - self.rho, -q);
        let mut sum = *self.hi.last().unwrap();
        let mut carry = *self.lo.last().unwrap();
        let mut p = *self.pmf.last().unwrap();
        self.pmf.reserve(n + 1 - self.pmf.len());
        self.cdf.reserve(n + 1 - self.cdf.len());
        self.hi.reserve(n + 1 - self.hi.len());
        self.lo.reserve(n + 1 - self.lo.len());
        while self.pmf.len() <= n {
            let k = T::of((self.pmf.len() - 1) as f64);
            let f = (T::of(2.0) * (T::of(2.0) * k + T::one())) / (k + T::of(2.0));
            let pf = p * f;
            p = pf.mul_add(q, pf * q_lo);
            self.pmf.push(p);
            let (s, e) = T::two_sum(&sum, &p);
            sum = s;
            carry = carry + e;
            self.hi.push(sum);
            self.lo.push(carry);
            self.cdf.push(sum + carry);
        }
        Ok(())
    }

    /// `P(X = n)`.
    pub fn pmf(&mut self, n: usize) -> Result<T> {
        self.extend_to(n)?;
        Ok(self.pmf[n])
    }

    /// `P(X > m)`.
    pub fn tail_after(&mut self, m: usize) -> Result<T> {
        self.extend_to(m)?;
        // 1 - hi is exact once hi >= 1/2
        Ok(((T::one() - self.hi[m]) - self.lo[m]).max(T::zero()))
    }

    /// `q(L) = P(Y > L) = P(X > floor((L - 1) / 2))`, with `q(0) = 1`.
    pub fn gap_tail(&mut self, length: usize) -> Result<T> {
        if length == 0 {
            return Ok(T::one());
        }
        self.tail_after((length - 1) / 2)
    }

    /// Upper bound on `P(X > n)` from the ratio bound
    /// `p_{m+1} / p_m < 1 - 4 delta^2`; `None` when `delta = 0`.
    pub fn tail_bound(&self, n: usize) -> Option<T> {
        let r = T::one() - T::of(4.0) * self.delta * self.delta;
        if r >= T::one() || n >= self.pmf.len() {
            return None;
        }
        Some(self.pmf[n] * r / (T::one() - r))
    }

    /// Extends the table until the analytic tail bound falls below `eps`.
    /// Fails at the table cap, which always happens for `delta = 0`.
    pub fn extend_until_tail_below(&mut self, eps: T) -> Result<usize> {
        let mut n = self.pmf.len() - 1;
        loop {
            if let Some(b) = self.tail_bound(n) {
                if b < eps {
                    return Ok(n);
                }
            }
            n = (2 * n + 16).min(self.cap - 1);
            if n + 1 == self.pmf.len() {
                return Err(FepError::TableCapExceeded { cap: self.cap });
            }
            self.extend_to(n)?;
        }
    }

    /// Draws `X` by inverse CDF, growing the table on demand.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let u = T::of(rng.random::<f64>());
        loop {
            let idx = self.cdf.partition_point(|&c| c <= u);
            if idx < self.cdf.len() {
                return Ok(idx);
            }
            let last = self.pmf.len() - 1;
            if let Some(b) = self.tail_bound(last) {
                if b.lossy_f64() < NEGLIGIBLE_TAIL {
                    // u sits in the rounding gap between the summed cdf and 1
                    return Ok(last);
                }
            }
            if self.pmf.len() >= self.cap {
                return Err(FepError::TableCapExceeded { cap: self.cap });
            }
            let target = (2 * self.pmf.len()).clamp(64, self.cap) - 1;
            self.extend_to(target)?;
        }
    }

    /// Immutable sampler resolving `X` exactly up to `max_gap`.
    pub fn truncated(&mut self, max_gap: usize) -> Result<TruncatedGapSampler<T>> {
        self.extend_to(max_gap)?;
        Ok(TruncatedGapSampler::new(&self.cdf[..=max_gap]))
    }
}

/// Outcome of a truncated gap draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapDraw {
    Exact(usize),
    Beyond,
}

/// Inverse-CDF sampler over `P(X = 0..=max)` plus one lumped tail outcome,
/// with a guide table for O(1) expected lookup.
#[derive(Debug, Clone)]
pub struct TruncatedGapSampler<T: Real> {
    cdf: Vec<T>,
    guide: Vec<u32>,
}

impl<T: Real> TruncatedGapSampler<T> {
    fn new(cdf: &[T]) -> Self {
        let buckets = cdf.len().clamp(16, 1 << 16);
        let mut guide = Vec::with_capacity(buckets);
        let mut idx = 0usize;
        for b in 0..buckets {
            let level = T::of(b as f64 / buckets as f64);
            while idx < cdf.len() && cdf[idx] <= level {
                idx += 1;
            }
            guide.push(idx as u32);
        }
        Self { cdf: cdf.to_vec(), guide }
    }

    pub fn max_gap(&self) -> usize {
        self.cdf.len() - 1
    }

    /// Draws `X`, reporting `Beyond` when `X > limit` (`limit <= max_gap`).
    pub fn sample_within<R: Rng + ?Sized>(&self, rng: &mut R, limit: usize) -> GapDraw {
        debug_assert!(limit <= self.max_gap());
        let uf = rng.random::<f64>();
        let u = T::of(uf);
        let mut idx = self.guide[(uf * self.guide.len() as f64) as usize] as usize;
        while idx <= limit && self.cdf[idx] <= u {
            idx += 1;
        }
        if idx > limit {
            GapDraw::Beyond
        } else {
            GapDraw::Exact(idx)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GapDraw {
        self.sample_within(rng, self.max_gap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::catalan;
    use crate::rng::replica_stream;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive};

    fn rational_delta(d: f64) -> BigRational {
        BigRational::from_float(d).unwrap()
    }

    /// `C_n rho^n (1 - rho)^(n+1)` in exact arithmetic.
    fn pmf_oracle(delta: &BigRational, n: usize) -> BigRational {
        let rho = BigRational::new(1.into(), 2.into()) - delta;
        let c = BigRational::from_integer(BigInt::from(catalan(n)));
        c * num_traits::pow(rho.clone(), n) * num_traits::pow(BigRational::one() - rho, n + 1)
    }

    #[test]
    fn reference_values() {
        let mut law = GapLaw::new(0.0f64).unwrap();
        assert_eq!(law.pmf(0).unwrap(), 0.5);
        assert!((law.pmf(3).unwrap() - 0.0390625).abs() < 1e-16);
        let mut law = GapLaw::new(0.1f64).unwrap();
        assert!((law.pmf(1).unwrap() - 0.144).abs() < 1e-15);
        let mut law0 = GapLaw::new(0.0f64).unwrap();
        assert!((law0.gap_tail(1).unwrap() - 0.5).abs() < 1e-15);
        assert!((law0.gap_tail(3).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(law.gap_tail(0).unwrap(), 1.0);
    }

    #[test]
    fn rational_recurrence_is_exactly_the_catalan_form() {
        for d in [0.0, 0.25, 0.1, 0.01] {
            let delta = rational_delta(d);
            let terms = gap_pmf_terms(&delta, 40);
            for (n, t) in terms.iter().enumerate() {
                assert_eq!(t, &pmf_oracle(&delta, n));
            }
        }
    }

    #[test]
    fn f64_table_matches_both_closed_forms() {
        for d in [0.0, 0.01, 0.1, 0.25] {
            let mut law = GapLaw::new(d).unwrap();
            law.extend_to(64).unwrap();
            let delta = rational_delta(d);
            for n in 0..=64 {
                let exact = pmf_oracle(&delta, n).to_f64().unwrap();
                let got = law.pmf_table()[n];
                assert!(((got - exact) / exact).abs() < 1e-12, "delta {d} n {n}");
                // (1 + 2 delta)(1 - 4 delta^2)^n C_n / (2 4^n)
                let second = BigRational::from_integer(BigInt::from(catalan(n)))
                    * (BigRational::one() + BigRational::from_integer(2.into()) * &delta)
                    * num_traits::pow(
                        BigRational::one() - BigRational::from_integer(4.into()) * &delta * &delta,
                        n,
                    )
                    / (BigRational::from_integer(2.into())
                        * num_traits::pow(BigRational::from_integer(4.into()), n));
                let second = second.to_f64().unwrap();
                assert!(((got - second) / second).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ratio_invariant_and_monotone_cdf() {
        let mut law = GapLaw::new(0.05f64).unwrap();
        law.extend_to(2000).unwrap();
        let rho = law.rho();
        let pmf = law.pmf_table();
        for n in 0..2000 {
            assert!(pmf[n] > 0.0);
            let want = rho * (1.0 - rho) * 2.0 * (2 * n + 1) as f64 / (n + 2) as f64;
            assert!((pmf[n + 1] / pmf[n] - want).abs() / want < 1e-12);
        }
        assert!(law.cdf_table().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn normalization_and_mean_gap() {
        for d in [0.01, 0.05, 0.1, 0.25, 0.4] {
            let mut law = GapLaw::new(d).unwrap();
            let n = law.extend_until_tail_below(1e-12).unwrap();
            let total: f64 = law.pmf_table()[..=n].iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "delta {d}: {total}");
            let mean: f64 =
                law.pmf_table()[..=n].iter().enumerate().map(|(k, p)| (2 * k + 1) as f64 * p).sum();
            let want = 1.0 / (2.0 * d);
            assert!((mean - want).abs() / want < 1e-6, "delta {d}: {mean}");
        }
    }

    #[test]
    fn zero_delta_cdf_tends_to_one_slowly() {
        let mut law = GapLaw::with_cap(0.0f64, 1 << 20).unwrap();
        let tail = law.tail_after(10_000).unwrap();
        // P(X0 > m) ~ 1 / sqrt(pi m)
        let asym = 1.0 / (std::f64::consts::PI * 10_000.0).sqrt();
        assert!((tail / asym - 1.0).abs() < 1e-3);
        assert!(matches!(law.extend_until_tail_below(1e-12), Err(FepError::TableCapExceeded { .. })));
    }

    #[test]
    fn sampler_mean_matches_inverse_density() {
        let mut law = GapLaw::new(0.1f64).unwrap();
        let mut rng = replica_stream(11, 0);
        let n = 1_000_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let y = (2 * law.sample(&mut rng).unwrap() + 1) as f64;
            s += y;
            s2 += y * y;
        }
        let mean = s / n as f64;
        let sd = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * sd, "mean {mean} sd {sd}");
    }

    #[test]
    fn zero_delta_sampler_hits_half_at_zero() {
        let mut law = GapLaw::new(0.0f64).unwrap();
        let sampler = law.truncated(64).unwrap();
        let mut rng = replica_stream(12, 0);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| sampler.sample(&mut rng) == GapDraw::Exact(0)).count();
        let p = zeros as f64 / n as f64;
        let sd = (0.25 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sd);
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut a = GapLaw::new(0.05f64).unwrap();
        let mut b = GapLaw::new(0.05f64).unwrap();
        let mut ra = replica_stream(99, 4);
        let mut rb = replica_stream(99, 4);
        let xa: Vec<usize> = (0..500).map(|_| a.sample(&mut ra).unwrap()).collect();
        let xb: Vec<usize> = (0..500).map(|_| b.sample(&mut rb).unwrap()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn cap_is_enforced() {
        let mut law = GapLaw::with_cap(0.0f64, 1000).unwrap();
        assert!(matches!(law.extend_to(1000), Err(FepError::TableCapExceeded { cap: 1000 })));
    }

    #[test]
    fn single_precision_instantiation() {
        let mut law = GapLaw::new(0.1f32).unwrap();
        assert!((law.pmf(1).unwrap() - 0.144).abs() < 1e-6);
    }
}
