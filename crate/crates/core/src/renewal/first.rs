//! Law of `F`, the first renewal strictly to the right of the origin under
//! the (unconditioned) frozen measure: `p(l) = 2 delta q(l - 1)`.

use crate::error::{FepError, Result};
use crate::renewal::gap::GapLaw;
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone)]
pub struct FirstRenewalLaw<T: Real> {
    gap: GapLaw<T>,
}

impl<T: Real> FirstRenewalLaw<T> {
    pub fn new(delta: T) -> Result<Self> {
        Self::from_gap_law(GapLaw::new(delta)?)
    }

    pub fn from_gap_law(gap: GapLaw<T>) -> Result<Self> {
        if gap.delta() <= T::zero() {
            return Err(FepError::DeltaZero { op: "first-renewal law" });
        }
        Ok(Self { gap })
    }

    pub fn delta(&self) -> T {
        self.gap.delta()
    }

    pub fn gap_law(&mut self) -> &mut GapLaw<T> {
        &mut self.gap
    }

    pub fn into_gap_law(self) -> GapLaw<T> {
        self.gap
    }

    /// `q(L) = P(Y > L)`.
    pub fn q(&mut self, length: usize) -> Result<T> {
        self.gap.gap_tail(length)
    }

    /// `p(l) = P(F = l) = 2 delta q(l - 1)`, `l >= 1`.
    pub fn p(&mut self, l: usize) -> Result<T> {
        if l == 0 {
            return Err(FepError::InvalidArgument("first renewal position must be >= 1".into()));
        }
        Ok(T::of(2.0) * self.delta() * self.q(l - 1)?)
    }

    /// `P(F <= L)`, the probability that `J_L` holds a renewal event.
    pub fn cdf(&mut self, length: usize) -> Result<T> {
        let mut acc = CompensatedSum::default();
        for l in 1..=length {
            acc.add(&self.p(l)?);
        }
        Ok(acc.value())
    }

    /// `(P(F > L, F odd), P(F > L, F even))`.
    ///
    /// From `P(F = 2m+1) = 2 delta P(X >= m)` and `P(F = 2m+2) = 2 delta P(X >= m+1)`
    /// both masses are `2 delta S(M)` with `S(M) = sum_{m >= M} P(X >= m)
    /// = 1 + E X - sum_{m < M} P(X >= m)` and `E X = (1 - 2 delta) / (4 delta)`.
    pub fn beyond_by_parity(&mut self, length: usize) -> Result<(T, T)> {
        let two_delta = T::of(2.0) * self.delta();
        let odd_from = length.div_ceil(2);
        let even_from = length / 2 + 1;
        let odd = two_delta * self.tail_sum_from(odd_from)?;
        let even = two_delta * self.tail_sum_from(even_from)?;
        Ok((odd.max(T::zero()), even.max(T::zero())))
    }

    fn tail_sum_from(&mut self, m_start: usize) -> Result<T> {
        let d = self.delta();
        let mean_x = (T::one() - T::of(2.0) * d) / (T::of(4.0) * d);
        let mut acc = CompensatedSum::default();
        acc.add(&(T::one() + mean_x));
        for m in 0..m_start {
            let p_ge = if m == 0 { T::one() } else { self.gap.tail_after(m - 1)? };
            acc.add(&-p_ge);
        }
        Ok(acc.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let mut law = FirstRenewalLaw::new(0.1f64).unwrap();
        assert!((law.p(1).unwrap() - 0.2).abs() < 1e-15);
        let p0 = law.gap_law().pmf(0).unwrap();
        assert!((law.p(2).unwrap() - 0.2 * (1.0 - p0)).abs() < 1e-15);
        assert!((law.p(2).unwrap() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_delta() {
        assert!(matches!(FirstRenewalLaw::new(0.0f64), Err(FepError::DeltaZero { .. })));
    }

    #[test]
    fn relation_to_gap_tail() {
        let mut law = FirstRenewalLaw::new(0.07f64).unwrap();
        assert_eq!(law.q(0).unwrap(), 1.0);
        for l in 1..300 {
            let want = 2.0 * 0.07 * law.q(l - 1).unwrap();
            assert_eq!(law.p(l).unwrap(), want);
        }
        // paired values: P(F = 2m) = P(F = 2m + 1)
        for m in 1..100 {
            assert_eq!(law.p(2 * m).unwrap(), law.p(2 * m + 1).unwrap());
        }
    }

    #[test]
    fn normalization_by_partial_sum() {
        let mut law = FirstRenewalLaw::new(0.1f64).unwrap();
        let s = law.cdf(100_000).unwrap();
        assert!(s >= 0.999_999, "{s}");
        assert!(s <= 1.0 + 1e-12, "{}", s - 1.0);
    }

    #[test]
    fn parity_masses_complete_the_law() {
        for d in [0.01f64, 0.05, 0.2] {
            let mut law = FirstRenewalLaw::new(d).unwrap();
            for length in [1usize, 2, 7, 100, 101, 1000] {
                let inside = law.cdf(length).unwrap();
                let (odd, even) = law.beyond_by_parity(length).unwrap();
                assert!((inside + odd + even - 1.0).abs() < 1e-12, "d {d} L {length}");
                // brute-force the parity split by summing far enough
                let far = length + 40_000;
                let mut o = 0.0;
                let mut e = 0.0;
                for l in length + 1..=far {
                    if l % 2 == 1 { o += law.p(l).unwrap() } else { e += law.p(l).unwrap() }
                }
                if d >= 0.05 {
                    assert!((o - odd).abs() < 1e-10 && (e - even).abs() < 1e-10);
                }
            }
        }
    }
}
