//! Asymptotic predictions for the number variance.
//!
//! Odd `L`: `1/4` for `L << delta^{-2/3}`, `C delta L^{3/2}` for
//! `delta^{-2/3} << L << delta^{-2}` and `rho (1 - rho) L` for
//! `L >> delta^{-2}`, with `C = (2/3) sqrt(2/pi)`. Even `L` has no plateau.
//! The bands are `L < s delta^{-2/3}`, `delta^{-2/3} / s < L < s delta^{-2}`
//! and `L > l delta^{-2}`; anything else is a crossover.

use serde::Serialize;

use crate::error::{check_delta, Result};
use crate::estimators::stats::Parity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Plateau,
    Intermediate,
    Linear,
    Crossover,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Plateau => "plateau",
            Regime::Intermediate => "intermediate",
            Regime::Linear => "linear",
            Regime::Crossover => "crossover",
        }
    }
}

/// Band margins `(s, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Margins {
    pub s: f64,
    pub l: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Self { s: 0.6, l: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimePrediction {
    pub delta: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub parity: Parity,
    pub regime: Regime,
    pub predicted_variance: f64,
    /// `(delta^{-2/3}, delta^{-2})`.
    pub thresholds: (f64, f64),
    /// `(s, l)`.
    pub margin_factors: (f64, f64),
    /// `L / 4`, the small-delta form of the linear prediction.
    pub quarter_l: f64,
}

/// `(2/3) sqrt(2/pi)`.
pub fn intermediate_constant() -> f64 {
    2.0 / 3.0 * (2.0 / std::f64::consts::PI).sqrt()
}

pub fn predict_variance(delta: f64, length: usize, margins: Margins) -> Result<RegimePrediction> {
    check_delta(delta)?;
    let l = length as f64;
    let rho = 0.5 - delta;
    let (t1, t2) = if delta > 0.0 { (delta.powf(-2.0 / 3.0), delta.powi(-2)) } else { (f64::INFINITY, f64::INFINITY) };
    let parity = Parity::of(length);
    let growth = intermediate_constant() * delta * l.powf(1.5);
    let linear = rho * (1.0 - rho) * l;
    let plateau_band = parity == Parity::Odd && l < margins.s * t1;
    let lower_ok = parity == Parity::Even || l > t1 / margins.s;
    let (regime, predicted_variance) = if plateau_band {
        (Regime::Plateau, 0.25)
    } else if lower_ok && l < margins.s * t2 {
        (Regime::Intermediate, growth)
    } else if l > margins.l * t2 {
        (Regime::Linear, linear)
    } else if l < margins.s * t2 {
        // between plateau and growth: both contributions
        (Regime::Crossover, 0.25 + growth)
    } else {
        (Regime::Crossover, growth.min(linear))
    };
    Ok(RegimePrediction {
        delta,
        length,
        parity,
        regime,
        predicted_variance,
        thresholds: (t1, t2),
        margin_factors: (margins.s, margins.l),
        quarter_l: l / 4.0,
    })
}

/// `min(1, 4 sqrt(2/pi) delta sqrt(L))`, the small-delta probability that a
/// window of `L` sites holds a renewal.
pub fn predict_renewal_hit(delta: f64, length: usize) -> Result<f64> {
    check_delta(delta)?;
    Ok((4.0 * (2.0 / std::f64::consts::PI).sqrt() * delta * (length as f64).sqrt()).min(1.0))
}
