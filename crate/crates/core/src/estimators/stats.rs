//! Mergeable window statistics.
//!
//! Counts are accumulated as exact integer power sums about fixed shifts
//! (`round(rho L)` for `N`, `round(2 delta L)` for `N_ren`), so partial
//! results merge exactly and the reduction order cannot change the result.

use serde::Serialize;

use crate::error::{FepError, Result};
use crate::estimators::decompose::{decompose, Decomposition};
use crate::renewal::WindowSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(length: usize) -> Self {
        if length % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }
}

/// Power sums `sum d^p`, `p = 1..=4`, of shifted integer observations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Moments([i128; 4]);

impl Moments {
    fn push(&mut self, d: i64) {
        let d = d as i128;
        let mut p = d;
        for s in &mut self.0 {
            *s += p;
            p *= d;
        }
    }

    fn merge(&mut self, o: &Self) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a += b;
        }
    }

    /// `(mean of d, second and fourth central moments)` over `n` values.
    fn central(&self, n: f64) -> (f64, f64, f64) {
        let [s1, s2, s3, s4] = self.0.map(|s| s as f64 / n);
        let m = s1;
        let mu2 = s2 - m * m;
        let mu4 = s4 - 4.0 * m * s3 + 6.0 * m * m * s2 - 3.0 * m.powi(4);
        (m, mu2, mu4)
    }
}

/// Statistics of `(N, N_ren, sigma)` over windows of common `(delta, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    delta: f64,
    length: usize,
    n: u64,
    shift_n: i64,
    shift_r: i64,
    mom_n: Moments,
    mom_r: Moments,
    sigma_hist: [u64; 3],
    n_ren_odd: u64,
    // sums over windows of (R - shift_r)^p sigma^q, for the covariance
    r_sigma: i128,
    r2_sigma: i128,
    r_sigma2: i128,
    r2_sigma2: i128,
    identity_violations: u64,
}

/// Plain-data view of [`WindowStats`] for reports.
#[derive(Debug, Clone, Serialize)]
pub struct WindowSummary {
    pub delta: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub parity: Parity,
    pub n_samples: u64,
    pub mean_n: f64,
    pub var_n: f64,
    pub var_n_stderr: f64,
    pub mean_nren: f64,
    pub mean_nren_stderr: f64,
    pub var_nren: f64,
    pub sigma_histogram: [u64; 3],
    pub p_sigma_nonzero: f64,
}

impl WindowStats {
    pub fn new(delta: f64, length: usize) -> Self {
        let rho = 0.5 - delta;
        Self {
            delta,
            length,
            n: 0,
            shift_n: (rho * length as f64).round() as i64,
            shift_r: (2.0 * delta * length as f64).round() as i64,
            mom_n: Moments::default(),
            mom_r: Moments::default(),
            sigma_hist: [0; 3],
            n_ren_odd: 0,
            r_sigma: 0,
            r2_sigma: 0,
            r_sigma2: 0,
            r2_sigma2: 0,
            identity_violations: 0,
        }
    }

    pub fn push(&mut self, d: &Decomposition) {
        self.n += 1;
        self.mom_n.push(d.n as i64 - self.shift_n);
        let r = d.n_ren as i64 - self.shift_r;
        self.mom_r.push(r);
        self.sigma_hist[(d.sigma + 1) as usize] += 1;
        if d.n_ren % 2 == 1 {
            self.n_ren_odd += 1;
        }
        let (r, s) = (r as i128, d.sigma as i128);
        self.r_sigma += r * s;
        self.r2_sigma += r * r * s;
        self.r_sigma2 += r * s * s;
        self.r2_sigma2 += r * r * s * s;
        if 2 * d.n as i64 != self.length as i64 - (d.n_ren as i64 + d.sigma as i64) {
            self.identity_violations += 1;
        }
    }

    pub fn push_window(&mut self, w: &WindowSample) -> Result<Decomposition> {
        if w.len() != self.length {
            return Err(FepError::InvalidArgument(format!("window of length {} in L = {} stats", w.len(), self.length)));
        }
        let d = decompose(w)?;
        self.push(&d);
        Ok(d)
    }

    /// Exact merge of two partial results for the same `(delta, L)`.
    pub fn merge(&mut self, o: &Self) -> Result<()> {
        if self.length != o.length || self.delta != o.delta {
            return Err(FepError::InvalidArgument("merging stats of different (delta, L)".into()));
        }
        self.n += o.n;
        self.mom_n.merge(&o.mom_n);
        self.mom_r.merge(&o.mom_r);
        for (a, b) in self.sigma_hist.iter_mut().zip(&o.sigma_hist) {
            *a += b;
        }
        self.n_ren_odd += o.n_ren_odd;
        self.r_sigma += o.r_sigma;
        self.r2_sigma += o.r2_sigma;
        self.r_sigma2 += o.r_sigma2;
        self.r2_sigma2 += o.r2_sigma2;
        self.identity_violations += o.identity_violations;
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.length)
    }

    pub fn n_samples(&self) -> u64 {
        self.n
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn bessel(&self) -> f64 {
        self.nf() / (self.nf() - 1.0)
    }

    pub fn mean_n(&self) -> f64 {
        self.shift_n as f64 + self.mom_n.central(self.nf()).0
    }

    /// Unbiased sample variance of `N`.
    pub fn var_n(&self) -> f64 {
        self.mom_n.central(self.nf()).1 * self.bessel()
    }

    /// `sqrt((m4 - m2^2) / n)`.
    pub fn var_n_stderr(&self) -> f64 {
        let (_, m2, m4) = self.mom_n.central(self.nf());
        ((m4 - m2 * m2).max(0.0) / self.nf()).sqrt()
    }

    pub fn mean_n_stderr(&self) -> f64 {
        (self.var_n() / self.nf()).sqrt()
    }

    pub fn mean_nren(&self) -> f64 {
        self.shift_r as f64 + self.mom_r.central(self.nf()).0
    }

    pub fn mean_nren_stderr(&self) -> f64 {
        (self.var_nren() / self.nf()).sqrt()
    }

    pub fn var_nren(&self) -> f64 {
        self.mom_r.central(self.nf()).1 * self.bessel()
    }

    pub fn var_nren_stderr(&self) -> f64 {
        let (_, m2, m4) = self.mom_r.central(self.nf());
        ((m4 - m2 * m2).max(0.0) / self.nf()).sqrt()
    }

    /// Counts of `sigma = -1, 0, +1`.
    pub fn sigma_histogram(&self) -> [u64; 3] {
        self.sigma_hist
    }

    pub fn p_sigma_nonzero(&self) -> f64 {
        (self.sigma_hist[0] + self.sigma_hist[2]) as f64 / self.nf()
    }

    pub fn p_sigma_nonzero_stderr(&self) -> f64 {
        let p = self.p_sigma_nonzero();
        (p * (1.0 - p) / self.nf()).sqrt()
    }

    /// Fraction of windows with an odd renewal count.
    pub fn p_nren_odd(&self) -> f64 {
        self.n_ren_odd as f64 / self.nf()
    }

    pub fn mean_sigma(&self) -> f64 {
        (self.sigma_hist[2] as f64 - self.sigma_hist[0] as f64) / self.nf()
    }

    pub fn mean_sigma_stderr(&self) -> f64 {
        let m = self.mean_sigma();
        ((self.p_sigma_nonzero() - m * m).max(0.0) / self.nf()).sqrt()
    }

    /// Sample covariance of `N_ren` and `sigma` with its standard error.
    pub fn cov_nren_sigma(&self) -> (f64, f64) {
        let n = self.nf();
        let mr = self.mom_r.central(n).0;
        let ms = self.mean_sigma();
        let e_rs = self.r_sigma as f64 / n;
        let cov = e_rs - mr * ms;
        // E[(R - mr)^2 (s - ms)^2] from the stored mixed sums
        let e_r2s2 = self.r2_sigma2 as f64 / n;
        let e_rs2 = self.r_sigma2 as f64 / n;
        let e_s2 = self.p_sigma_nonzero();
        let e_r2s = self.r2_sigma as f64 / n;
        let e_r2 = self.mom_r.0[1] as f64 / n;
        let e_r = mr;
        let e_s = ms;
        // expand (R - a)^2 (s - b)^2 with a = mr, b = ms
        let (a, b) = (mr, ms);
        let q = e_r2s2 - 2.0 * b * e_r2s + b * b * e_r2 - 2.0 * a * e_rs2 + 4.0 * a * b * e_rs
            - 2.0 * a * b * b * e_r
            + a * a * e_s2
            - 2.0 * a * a * b * e_s
            + a * a * b * b;
        let se = ((q - cov * cov).max(0.0) / n).sqrt();
        (cov, se)
    }

    /// `Var(N) - (Var(N_ren) + P(sigma != 0)) / 4` and a combined standard
    /// error.
    pub fn split_residual(&self) -> (f64, f64) {
        let d = self.var_n() - 0.25 * (self.var_nren() + self.p_sigma_nonzero());
        let se = (self.var_n_stderr().powi(2)
            + (0.25 * self.var_nren_stderr()).powi(2)
            + (0.25 * self.p_sigma_nonzero_stderr()).powi(2))
        .sqrt();
        (d, se)
    }

    /// Windows whose counts violated the decomposition identity.
    pub fn identity_violations(&self) -> u64 {
        self.identity_violations
    }

    pub fn summary(&self) -> WindowSummary {
        WindowSummary {
            delta: self.delta,
            length: self.length,
            parity: self.parity(),
            n_samples: self.n,
            mean_n: self.mean_n(),
            var_n: self.var_n(),
            var_n_stderr: self.var_n_stderr(),
            mean_nren: self.mean_nren(),
            mean_nren_stderr: self.mean_nren_stderr(),
            var_nren: self.var_nren(),
            sigma_histogram: self.sigma_hist,
            p_sigma_nonzero: self.p_sigma_nonzero(),
        }
    }

    /// Mean of `(N - mu)^2` for a given `mu`.
    fn centred_square_mean(&self, mu: f64) -> f64 {
        let n = self.nf();
        let c = mu - self.shift_n as f64;
        let s1 = self.mom_n.0[0] as f64 / n;
        let s2 = self.mom_n.0[1] as f64 / n;
        s2 - 2.0 * c * s1 + c * c
    }
}

/// Decomposes and accumulates windows of a common `(delta, L)`.
pub fn accumulate<'a, I>(windows: I) -> Result<WindowStats>
where
    I: IntoIterator<Item = &'a WindowSample>,
{
    let mut it = windows.into_iter().peekable();
    let first = it.peek().ok_or_else(|| FepError::InvalidArgument("no windows".into()))?;
    let mut stats = WindowStats::new(first.delta(), first.len());
    for w in it {
        if w.delta() != stats.delta {
            return Err(FepError::InvalidArgument("windows of different delta".into()));
        }
        stats.push_window(w)?;
    }
    if stats.n < 2 {
        return Err(FepError::InvalidArgument("need at least two windows".into()));
    }
    Ok(stats)
}

/// Merges batches in order.
pub fn merge_all(batches: &[WindowStats]) -> Result<WindowStats> {
    let (first, rest) = batches.split_first().ok_or_else(|| FepError::InvalidArgument("no batches".into()))?;
    let mut total = first.clone();
    for b in rest {
        total.merge(b)?;
    }
    Ok(total)
}

/// Batch-means standard error of the variance of `N`: the spread of the
/// per-batch means of `(N - mean)^2`, weighted by batch size.
pub fn blocked_var_stderr(batches: &[WindowStats]) -> Result<f64> {
    let batches: Vec<&WindowStats> = batches.iter().filter(|b| b.n > 0).collect();
    if batches.len() < 2 {
        return Err(FepError::InvalidArgument("need at least two nonempty batches".into()));
    }
    let total = merge_all(&batches.iter().map(|b| (*b).clone()).collect::<Vec<_>>())?;
    let mu = total.mean_n();
    let n = total.nf();
    let zbar: Vec<f64> = batches.iter().map(|b| b.centred_square_mean(mu)).collect();
    let z = batches.iter().zip(&zbar).map(|(b, z)| b.nf() * z).sum::<f64>() / n;
    let k = batches.len() as f64;
    let var = batches.iter().zip(&zbar).map(|(b, zb)| (b.nf() * (zb - z)).powi(2)).sum::<f64>() / (n * n) * k
        / (k - 1.0);
    Ok(var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_stream;
    use crate::renewal::WindowSampler;

    fn d(n: usize, n_ren: usize, sigma: i8) -> Decomposition {
        Decomposition { n, n_ren, sigma }
    }

    #[test]
    fn moments_match_direct_computation() {
        let obs = [d(3, 1, 0), d(5, 0, -1), d(2, 2, 1), d(4, 1, 0), d(7, 3, 1)];
        let mut s = WindowStats::new(0.1, 10);
        for o in &obs {
            s.push(o);
        }
        let xs: Vec<f64> = obs.iter().map(|o| o.n as f64).collect();
        let m = xs.iter().sum::<f64>() / 5.0;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean_n() - m).abs() < 1e-12);
        assert!((s.var_n() - v).abs() < 1e-12);
        assert_eq!(s.sigma_histogram(), [1, 2, 2]);
        assert_eq!(s.p_nren_odd(), 0.6);
        let rs: Vec<(f64, f64)> = obs.iter().map(|o| (o.n_ren as f64, o.sigma as f64)).collect();
        let mr = rs.iter().map(|p| p.0).sum::<f64>() / 5.0;
        let ms = rs.iter().map(|p| p.1).sum::<f64>() / 5.0;
        let cov = rs.iter().map(|p| (p.0 - mr) * (p.1 - ms)).sum::<f64>() / 5.0;
        let q = rs.iter().map(|p| ((p.0 - mr) * (p.1 - ms)).powi(2)).sum::<f64>() / 5.0;
        let (c, se) = s.cov_nren_sigma();
        assert!((c - cov).abs() < 1e-12);
        assert!((se - ((q - cov * cov) / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn merge_is_exact_and_order_free() {
        let sampler = WindowSampler::new(0.05f64, 101).unwrap();
        let mut rng = replica_stream(4, 0);
        let windows: Vec<WindowSample> = (0..3000).map(|_| sampler.sample(&mut rng)).collect();
        let whole = accumulate(&windows).unwrap();
        let parts: Vec<WindowStats> = windows.chunks(700).map(|c| accumulate(c).unwrap()).collect();
        let a = merge_all(&parts).unwrap();
        let mut rev = parts.clone();
        rev.reverse();
        let b = merge_all(&rev).unwrap();
        assert_eq!(a, whole);
        assert_eq!(b, whole);
        assert_eq!(whole.identity_violations(), 0);
        assert_eq!(whole.sigma_histogram().iter().sum::<u64>(), 3000);
        let blocked = blocked_var_stderr(&parts).unwrap();
        assert!(blocked > 0.0 && blocked.is_finite());
    }

    #[test]
    fn accumulate_needs_two_windows() {
        let sampler = WindowSampler::new(0.05f64, 11).unwrap();
        let w = sampler.sample(&mut replica_stream(0, 0));
        assert!(accumulate(std::slice::from_ref(&w)).is_err());
    }

    #[test]
    fn parity_law_holds_per_window() {
        // sigma != 0 exactly when L - N_ren is odd
        for length in [40usize, 41] {
            let sampler = WindowSampler::new(0.1f64, length).unwrap();
            let mut rng = replica_stream(8, length as u64);
            let windows: Vec<WindowSample> = (0..5000).map(|_| sampler.sample(&mut rng)).collect();
            let s = accumulate(&windows).unwrap();
            let want = if length % 2 == 0 { s.p_nren_odd() } else { 1.0 - s.p_nren_odd() };
            assert_eq!(s.p_sigma_nonzero(), want);
        }
    }
}
