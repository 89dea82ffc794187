//! Facilitated exclusion process on `Z` and on the ring: the frozen measure,
//! its renewal structure, and the number variance of particles in a window.
//!
//! Core routines are generic over [`Scalar`] (all numeric types, including
//! exact rationals) or [`Real`] (`f32`/`f64`). The aliases below name the
//! common instantiations.

pub mod bits;
pub mod correlation;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod renewal;
pub mod rng;
pub mod scalar;
pub mod walk_max;

pub use bits::Bits;
pub use correlation::{correlation_by_integral, correlations_by_series, exact_variance, CorrelationTable};
pub use dynamics::{extract_gaps, init_bernoulli, FrozenEnsemble, LatticeConfig, Rule, RunOutcome};
pub use error::{FepError, Result};
pub use estimators::{
    accumulate, decompose, predict_renewal_hit, predict_variance, regime_report, Decomposition, Margins,
    Parity, Regime, RegimePrediction, RegimeReport, Route, RouteParams, WindowStats,
};
pub use renewal::{
    catalan, sample_window, FirstRenewal, FirstRenewalLaw, GapLaw, WindowRecord, WindowSample,
    WindowSampler,
};
pub use rng::{replica_stream, Stream};
pub use scalar::{CompensatedSum, Real, Scalar};
pub use walk_max::{
    half_normal_distance, walk_max_bruteforce, walk_max_pmf, walk_max_second_moment, WalkMaxLaw,
};

pub use num_rational::BigRational;

pub type GapLawF64 = GapLaw<f64>;
pub type GapLawF32 = GapLaw<f32>;
pub type FirstRenewalLawF64 = FirstRenewalLaw<f64>;
pub type WindowSamplerF64 = WindowSampler<f64>;
pub type CorrelationTableF64 = CorrelationTable<f64>;
pub type CorrelationTableF32 = CorrelationTable<f32>;
pub type ExactCorrelationTable = CorrelationTable<BigRational>;
pub type WalkMaxLawF64 = WalkMaxLaw<f64>;
pub type ExactWalkMaxLaw = WalkMaxLaw<BigRational>;
