//! The serialized description of one run. Command-line flags are converted
//! into a [`RunSpec`], and `--spec run.json` reads one directly.

use std::path::PathBuf;

use fep_core::{Margins, Route, Rule};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Sample,
    Simulate,
    Gaps,
    ExactVariance,
    Correlations,
    RwMax,
    Regimes,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ParityFilter {
    #[default]
    All,
    Odd,
    Even,
}

impl ParityFilter {
    fn keeps(self, length: usize) -> bool {
        match self {
            ParityFilter::All => true,
            ParityFilter::Odd => length % 2 == 1,
            ParityFilter::Even => length.is_multiple_of(2),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub subcommand: Subcommand,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    #[serde(rename = "L")]
    pub length: Option<usize>,
    #[serde(rename = "L_grid")]
    pub length_grid: Option<String>,
    pub parity: ParityFilter,
    pub route: Route,
    pub ring_size: usize,
    pub replicas: u64,
    pub samples: usize,
    pub seed: u64,
    pub rule: Rule,
    pub max_events: u64,
    pub window_gap: usize,
    pub margins: Margins,
    pub max_lag: Option<usize>,
    pub integral: bool,
    pub bins: usize,
    pub brute_check: bool,
    /// Frozen-ensemble container to read (`gaps`) or write (`simulate`).
    pub ensemble: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            subcommand: Subcommand::ExactVariance,
            delta: None,
            rho: None,
            length: None,
            length_grid: None,
            parity: ParityFilter::All,
            route: Route::ExactSeries,
            ring_size: 1 << 20,
            replicas: 50,
            samples: 100_000,
            seed: 0,
            rule: Rule::ParallelTa,
            max_events: u64::MAX,
            window_gap: 100,
            margins: Margins::default(),
            max_lag: None,
            integral: false,
            bins: 30,
            brute_check: false,
            ensemble: None,
            out: None,
            format: Format::Csv,
        }
    }
}

impl RunSpec {
    /// `delta`, from either `delta` or `rho = 1/2 - delta`.
    pub fn delta(&self) -> Result<f64, CliError> {
        let d = match (self.delta, self.rho) {
            (Some(d), None) => d,
            (None, Some(r)) => 0.5 - r,
            (Some(_), Some(_)) => return Err(CliError::usage("give exactly one of --delta and --rho")),
            (None, None) => return Err(CliError::usage("one of --delta or --rho is required")),
        };
        if !(0.0..0.5).contains(&d) {
            return Err(CliError::usage(format!("delta must lie in [0, 1/2), got {d}")));
        }
        Ok(d)
    }

    pub fn length(&self) -> Result<usize, CliError> {
        match self.length {
            Some(0) => Err(CliError::usage("--L must be positive")),
            Some(l) => Ok(l),
            None => Err(CliError::usage("--L is required")),
        }
    }

    /// Window lengths from `L` or `L_grid`, after the parity filter.
    pub fn lengths(&self) -> Result<Vec<usize>, CliError> {
        let raw = match (&self.length_grid, self.length) {
            (Some(g), None) => parse_grid(g)?,
            (None, Some(_)) => vec![self.length()?],
            (Some(_), Some(_)) => return Err(CliError::usage("give only one of --L and --L-grid")),
            (None, None) => return Err(CliError::usage("one of --L or --L-grid is required")),
        };
        let kept: Vec<usize> = raw.into_iter().filter(|&l| self.parity.keeps(l)).collect();
        if kept.is_empty() {
            return Err(CliError::usage("no window length survives the parity filter"));
        }
        Ok(kept)
    }
}

const DEFAULT_POINTS: usize = 25;

/// Parses `a,b,c` or `PARITY:MIN:MAX[:POINTS]` with `PARITY` one of `odd`,
/// `even`, `all`. Ranges are log-spaced, rounded to the nearest admissible
/// length, deduplicated and always include both ends.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::usage(format!("bad --L-grid {text:?}: use a,b,c or odd|even|all:MIN:MAX[:POINTS]"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 1 {
        let mut out = Vec::new();
        for p in text.split(',') {
            let l: usize = p.trim().parse().map_err(|_| bad())?;
            if l == 0 {
                return Err(bad());
            }
            out.push(l);
        }
        return Ok(out);
    }
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let lo: usize = parts[1].parse().map_err(|_| bad())?;
    let hi: usize = parts[2].parse().map_err(|_| bad())?;
    let points: usize = match parts.get(3) {
        Some(p) => p.parse().map_err(|_| bad())?,
        None => DEFAULT_POINTS,
    };
    if lo == 0 || hi < lo || points == 0 {
        return Err(bad());
    }
    let snap: fn(f64) -> usize = match parts[0] {
        "odd" => |x| 2 * ((x - 1.0) / 2.0).round() as usize + 1,
        "even" => |x| 2 * (x / 2.0).round().max(1.0) as usize,
        "all" => |x| x.round() as usize,
        _ => return Err(bad()),
    };
    if snap(lo as f64) != lo || snap(hi as f64) != hi {
        return Err(CliError::usage(format!("--L-grid ends {lo} and {hi} must match the parity {:?}", parts[0])));
    }
    if points == 1 || lo == hi {
        return Ok(vec![lo]);
    }
    let ratio = (hi as f64 / lo as f64).ln() / (points - 1) as f64;
    let mut out: Vec<usize> = (0..points)
        .map(|i| snap(lo as f64 * (ratio * i as f64).exp()).clamp(lo, hi))
        .collect();
    *out.last_mut().unwrap() = hi;
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("5, 7,100").unwrap(), vec![5, 7, 100]);
        let g = parse_grid("odd:11:100001").unwrap();
        assert_eq!((g[0], *g.last().unwrap()), (11, 100_001));
        assert!(g.iter().all(|l| l % 2 == 1) && g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(parse_grid("even:2:8:4").unwrap(), vec![2, 4, 6, 8]);
        assert_eq!(parse_grid("all:3:3").unwrap(), vec![3]);
        for bad in ["odd:10:21", "odd:11", "cube:1:9", "0,3", "x", "odd:21:11"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn delta_or_rho() {
        let mut s = RunSpec { rho: Some(0.45), ..RunSpec::default() };
        assert!((s.delta().unwrap() - 0.05).abs() < 1e-15);
        s.delta = Some(0.05);
        assert!(s.delta().is_err());
        assert!(RunSpec { delta: Some(0.5), ..RunSpec::default() }.delta().is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = RunSpec {
            subcommand: Subcommand::Regimes,
            delta: Some(0.01),
            length_grid: Some("odd:11:1001".into()),
            parity: ParityFilter::Odd,
            ..RunSpec::default()
        };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<RunSpec>(&text).unwrap(), s);
        let partial: RunSpec = serde_json::from_str(r#"{"subcommand":"rw-max","L":3}"#).unwrap();
        assert_eq!((partial.subcommand, partial.length), (Subcommand::RwMax, Some(3)));
        assert!(serde_json::from_str::<RunSpec>(r#"{"subcommand":"rw-max","bogus":1}"#).is_err());
    }
}
