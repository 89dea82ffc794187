//! Truncated two-point function `g(k) = E[eta(j) eta(j + k)] - rho^2` of the
//! frozen measure and the exact number variance built from it.

mod integral;
mod series;

pub use integral::{correlation_by_integral, gauss_legendre};
pub use series::{correlations_by_series, exact_variance, CorrelationTable};
