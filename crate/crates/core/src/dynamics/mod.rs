//! Facilitated exclusion dynamics on a ring, run to absorption.

mod ensemble;
mod lattice;

pub use ensemble::{extract_gaps, gap_histogram, FrozenEnsemble, FrozenReplica};
pub use lattice::{init_bernoulli, Jump, LatticeConfig, Rule, RunOutcome};
