use num_bigint::BigUint;
use num_traits::One;

/// The `n`-th Catalan number `binom(2n, n) / (n + 1)`, exactly.
pub fn catalan(n: usize) -> BigUint {
    let mut c = BigUint::one();
    for k in 0..n {
        // C_{k+1} = C_k * 2(2k+1) / (k+2); the division is exact
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Segner recurrence C_{n+1} = sum_i C_i C_{n-i}.
    fn catalan_dp(n: usize) -> Vec<BigUint> {
        let mut c = vec![BigUint::one()];
        for m in 0..n {
            let next = (0..=m).map(|i| &c[i] * &c[m - i]).sum();
            c.push(next);
        }
        c
    }

    #[test]
    fn small_values() {
        assert_eq!(catalan(0), BigUint::from(1u32));
        assert_eq!(catalan(3), BigUint::from(5u32));
        assert_eq!(catalan(10), BigUint::from(16796u32));
    }

    #[test]
    fn agrees_with_segner_recurrence() {
        let dp = catalan_dp(60);
        for (n, want) in dp.iter().enumerate() {
            assert_eq!(&catalan(n), want, "n = {n}");
        }
    }

    #[test]
    fn large_index_is_exact() {
        // C_n = binom(2n, n) - binom(2n, n + 1)
        let n = 400usize;
        let binom = |m: usize, k: usize| -> BigUint {
            let mut b = BigUint::one();
            for i in 0..k {
                b = b * BigUint::from(m - i) / BigUint::from(i + 1);
            }
            b
        };
        assert_eq!(catalan(n), binom(2 * n, n) - binom(2 * n, n + 1));
        assert!(catalan(5000).bits() > 9900);
    }
}
