//! Exact renewal structure of the frozen measure: Catalan gap law, first
//! renewal law, window sampling and the conditioned renewal count.

mod catalan;
mod first;
mod gap;
mod tail_bound;
mod window;

pub use catalan::catalan;
pub use first::FirstRenewalLaw;
pub use gap::{gap_pmf_terms, GapDraw, GapLaw, TruncatedGapSampler, DEFAULT_TABLE_CAP};
pub use tail_bound::{
    conditioned_renewal_count, renewal_count_tail_bound_check, tail_bound_report, TailBoundReport,
    TailBoundRow,
};
pub use window::{sample_window, FirstRenewal, WindowRecord, WindowSample, WindowSampler};

use crate::error::Result;
use crate::scalar::Real;

/// `q_delta(L) / q_0(L)`, a diagnostic only.
pub fn tail_ratio<T: Real>(delta: T, length: usize) -> Result<T> {
    let num = GapLaw::new(delta)?.gap_tail(length)?;
    let den = GapLaw::new(T::zero())?.gap_tail(length)?;
    Ok(num / den)
}
