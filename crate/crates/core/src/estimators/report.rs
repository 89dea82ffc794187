//! Measured or computed variance against the asymptotic prediction, over a
//! grid of window lengths, by one of three routes.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::correlations_by_series;
use crate::dynamics::{FrozenEnsemble, Rule};
use crate::error::{FepError, Result};
use crate::estimators::predict::{predict_variance, Margins};
use crate::estimators::stats::{blocked_var_stderr, merge_all, Parity, WindowStats};
use crate::renewal::WindowSampler;
use crate::rng::replica_stream;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ExactSeries,
    ExactSampler,
    Dynamics,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::ExactSeries => "exact-series",
            Route::ExactSampler => "exact-sampler",
            Route::Dynamics => "dynamics",
        }
    }
}

impl std::str::FromStr for Route {
    type Err = FepError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-series" => Ok(Route::ExactSeries),
            "exact-sampler" => Ok(Route::ExactSampler),
            "dynamics" => Ok(Route::Dynamics),
            _ => Err(FepError::InvalidArgument(format!("unknown route {s:?}"))),
        }
    }
}

/// Parameters of the statistical routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteParams {
    /// Windows per length for the sampler route.
    pub samples: usize,
    pub seed: u64,
    pub ring_size: usize,
    pub replicas: u64,
    pub rule: Rule,
    pub max_events: u64,
    /// Extra sites between consecutive dynamics windows.
    pub window_gap: usize,
    pub margins: Margins,
}

impl Default for RouteParams {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            ring_size: 1 << 20,
            replicas: 50,
            rule: Rule::ParallelTa,
            max_events: u64::MAX,
            window_gap: 100,
            margins: Margins::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub delta: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub parity: Parity,
    pub route: Route,
    pub variance: f64,
    pub stderr: Option<f64>,
    pub predicted: f64,
    pub ratio: f64,
    pub regime: String,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub schema_version: u32,
    pub delta: f64,
    pub route: Route,
    pub params: RouteParams,
    pub rows: Vec<ReportRow>,
}

const CHUNK: usize = 1 << 15;

/// Exact-sampler statistics for `samples` windows, in fixed-size chunks;
/// chunk `c` draws from stream `(seed, stream_base + c)`. Chunks are merged
/// in order, so the result does not depend on the thread count.
pub fn sampler_stats(delta: f64, length: usize, samples: usize, seed: u64, stream_base: u64) -> Result<WindowStats> {
    let sampler = WindowSampler::new(delta, length)?;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<WindowStats>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replica_stream(seed, stream_base + c as u64);
            let mut stats = WindowStats::new(delta, length);
            let count = CHUNK.min(samples - c * CHUNK);
            for _ in 0..count {
                stats.push_window(&sampler.sample(&mut rng))?;
            }
            Ok(stats)
        })
        .collect();
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    merge_all(&parts)
}

/// Per-replica window statistics from a frozen ensemble, windows of
/// `length` sites every `length + gap` sites.
pub fn ensemble_stats(ens: &FrozenEnsemble, length: usize, gap: usize) -> Result<Vec<WindowStats>> {
    let delta = ens.delta();
    ens.windows(length, length + gap)?
        .par_iter()
        .map(|batch| {
            let mut s = WindowStats::new(delta, length);
            for w in batch {
                s.push_window(w)?;
            }
            Ok(s)
        })
        .collect()
}

fn row(delta: f64, length: usize, route: Route, measured: Result<(f64, Option<f64>)>, margins: Margins) -> Result<ReportRow> {
    let pred = predict_variance(delta, length, margins)?;
    let (variance, stderr, note) = match measured {
        Ok((v, se)) => (v, se, None),
        Err(e) => (f64::NAN, None, Some(e.to_string())),
    };
    Ok(ReportRow {
        delta,
        length,
        parity: pred.parity,
        route,
        variance,
        stderr,
        predicted: pred.predicted_variance,
        ratio: variance / pred.predicted_variance,
        regime: pred.regime.name().to_string(),
        note,
    })
}

pub fn regime_report(delta: f64, grid: &[usize], route: Route, params: &RouteParams) -> Result<RegimeReport> {
    crate::error::check_delta(delta)?;
    if grid.is_empty() || grid.contains(&0) {
        return Err(FepError::InvalidArgument("grid must hold positive lengths".into()));
    }
    let margins = params.margins;
    let rows = match route {
        Route::ExactSeries => {
            let k = grid.iter().max().unwrap().saturating_sub(1).max(1);
            let table = correlations_by_series(delta, k)?;
            grid.iter()
                .map(|&l| row(delta, l, route, table.variance(l).map(|v| (v, None)), margins))
                .collect::<Result<Vec<_>>>()?
        }
        Route::ExactSampler => grid
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let m = sampler_stats(delta, l, params.samples, params.seed, (i as u64) << 32)
                    .map(|s| (s.var_n(), Some(s.var_n_stderr())));
                row(delta, l, route, m, margins)
            })
            .collect::<Result<Vec<_>>>()?,
        Route::Dynamics => {
            let ens = FrozenEnsemble::simulate(
                params.ring_size,
                0.5 - delta,
                params.rule,
                params.replicas,
                params.seed,
                params.max_events,
            )?;
            grid.iter()
                .map(|&l| row(delta, l, route, dynamics_variance(&ens, l, params.window_gap), margins))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(RegimeReport { schema_version: SCHEMA_VERSION, delta, route, params: params.clone(), rows })
}

fn dynamics_variance(ens: &FrozenEnsemble, length: usize, gap: usize) -> Result<(f64, Option<f64>)> {
    if 100 * length > ens.ring_size {
        return Err(FepError::InvalidArgument(format!(
            "L = {length} exceeds 1% of the ring ({} sites)",
            ens.ring_size
        )));
    }
    let batches = ensemble_stats(ens, length, gap)?;
    let total = merge_all(&batches)?;
    let se = blocked_var_stderr(&batches).unwrap_or_else(|_| total.var_n_stderr());
    Ok((total.var_n(), Some(se)))
}

impl RegimeReport {
    pub const CSV_HEADER: &'static str = "delta,L,parity,route,variance,stderr,predicted,ratio,regime,note";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.delta,
                r.length,
                r.parity.name(),
                r.route.name(),
                r.variance,
                r.stderr.map(|s| s.to_string()).unwrap_or_default(),
                r.predicted,
                r.ratio,
                r.regime,
                r.note.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperuniform_rows() {
        let r = regime_report(0.0, &[4, 5], Route::ExactSeries, &RouteParams::default()).unwrap();
        assert_eq!(r.rows[0].variance, 0.0);
        assert_eq!(r.rows[1].variance, 0.25);
        assert_eq!(r.rows[1].ratio, 1.0);
    }

    #[test]
    fn linear_rows_obey_the_bound() {
        let delta: f64 = 0.05;
        let l = 2000;
        let r = regime_report(delta, &[l], Route::ExactSeries, &RouteParams::default()).unwrap();
        let row = &r.rows[0];
        assert_eq!(row.regime, "linear");
        assert!((row.ratio - 1.0).abs() < 1.0 / (2.0 * delta * delta * l as f64));
    }

    #[test]
    fn sampler_rows_are_thread_count_independent() {
        let p = RouteParams { samples: 70_000, seed: 3, ..RouteParams::default() };
        let a = regime_report(0.1, &[21], Route::ExactSampler, &p).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| regime_report(0.1, &[21], Route::ExactSampler, &p).unwrap());
        assert_eq!(a.rows[0].variance, b.rows[0].variance);
        assert!(a.rows[0].stderr.unwrap() > 0.0);
    }

    #[test]
    fn infeasible_rows_are_not_fatal() {
        let p = RouteParams { ring_size: 1000, replicas: 2, ..RouteParams::default() };
        let r = regime_report(0.05, &[5, 101], Route::Dynamics, &p).unwrap();
        assert!(r.rows[0].note.is_none());
        assert!(r.rows[1].variance.is_nan() && r.rows[1].note.is_some());
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with(RegimeReport::CSV_HEADER));
    }
}
