//! Renewal counts under the measure conditioned on a renewal at the origin,
//! and the geometric bound `P(N_ren(L) >= n) <= (1 - q(L))^n`.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::renewal::gap::{GapDraw, GapLaw, TruncatedGapSampler};
use crate::scalar::Real;

/// Number of renewal events in `J_L` given a renewal at the origin.
pub fn conditioned_renewal_count<T: Real, R: Rng + ?Sized>(
    gaps: &TruncatedGapSampler<T>,
    length: usize,
    rng: &mut R,
) -> usize {
    let mut pos = 0usize;
    let mut count = 0usize;
    while pos < length {
        let remaining = length - pos;
        match gaps.sample_within(rng, (remaining - 1) / 2) {
            GapDraw::Exact(x) => {
                pos += 2 * x + 1;
                count += 1;
            }
            GapDraw::Beyond => break,
        }
    }
    count
}

#[derive(Debug, Clone, Serialize)]
pub struct TailBoundRow {
    pub n: usize,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailBoundReport {
    pub delta: f64,
    pub length: usize,
    pub samples: usize,
    pub q: f64,
    pub rows: Vec<TailBoundRow>,
}

impl TailBoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Compares the empirical survival function of the conditioned renewal
/// count against `(1 - q(L))^n` plus three standard errors, for each `n`.
pub fn renewal_count_tail_bound_check<R: Rng + ?Sized>(
    delta: f64,
    length: usize,
    ns: &[usize],
    samples: usize,
    rng: &mut R,
) -> Result<TailBoundReport> {
    let mut law = GapLaw::new(delta)?;
    let q = law.gap_tail(length)?;
    let sampler = law.truncated(length.saturating_sub(1) / 2)?;
    let counts: Vec<usize> =
        (0..samples).map(|_| conditioned_renewal_count(&sampler, length, rng)).collect();
    Ok(tail_bound_report(delta, length, q, &counts, ns))
}

/// Bound check on precomputed counts.
pub fn tail_bound_report(delta: f64, length: usize, q: f64, counts: &[usize], ns: &[usize]) -> TailBoundReport {
    let samples = counts.len();
    let rows = ns
        .iter()
        .map(|&n| {
            let hits = counts.iter().filter(|&&c| c >= n).count();
            let p = hits as f64 / samples as f64;
            let stderr = (p * (1.0 - p) / samples as f64).sqrt();
            let bound = (1.0 - q).powi(n as i32);
            TailBoundRow { n, empirical: p, stderr, bound, holds: p <= bound + 3.0 * stderr }
        })
        .collect();
    TailBoundReport { delta, length, samples, q, rows }
}
