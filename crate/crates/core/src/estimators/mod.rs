//! Window-count statistics, the renewal decomposition of the particle count,
//! asymptotic predictions and the regime comparison table.

mod decompose;
mod predict;
mod report;
mod stats;

pub use decompose::{decompose, Decomposition};
pub use predict::{
    intermediate_constant, predict_renewal_hit, predict_variance, Margins, Regime, RegimePrediction,
};
pub use report::{
    ensemble_stats, regime_report, sampler_stats, RegimeReport, ReportRow, Route, RouteParams, SCHEMA_VERSION,
};
pub use stats::{accumulate, blocked_var_stderr, merge_all, Parity, WindowStats, WindowSummary};
