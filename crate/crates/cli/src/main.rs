//! `fep`: experiments on the facilitated exclusion process and its frozen
//! measure. Exit codes: 0 success, 1 usage error, 2 runtime error, 3 a
//! replica did not freeze within `--max-events`.

mod error;
mod output;
mod run;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use fep_core::{Margins, Route, Rule};

use crate::error::CliError;
use crate::spec::{Format, ParityFilter, RunSpec, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "fep", version, about = "Facilitated exclusion process experiments")]
struct Cli {
    /// Read the whole run from a serialized RunSpec instead of flags.
    #[arg(long, value_name = "RUN.json")]
    spec: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Draw windows from the frozen measure with the exact renewal sampler.
    Sample {
        #[command(flatten)]
        density: Density,
        #[arg(long = "L")]
        length: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run the dynamics to absorption and optionally save the frozen ensemble.
    Simulate {
        #[command(flatten)]
        density: Density,
        #[command(flatten)]
        dynamics: Dynamics,
        /// Write the frozen configurations to this container file.
        #[arg(long)]
        ensemble: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical gap histogram of a frozen ensemble against the exact gap law.
    Gaps {
        /// Read a saved ensemble instead of simulating one.
        #[arg(long, conflicts_with_all = ["delta", "rho"])]
        ensemble: Option<PathBuf>,
        #[command(flatten)]
        density: OptDensity,
        #[command(flatten)]
        dynamics: Dynamics,
        /// Gap values shown individually; larger gaps form one tail bin.
        #[arg(long, default_value_t = 30)]
        bins: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exact number variance from the correlation series.
    ExactVariance {
        #[command(flatten)]
        density: Density,
        #[command(flatten)]
        lengths: Lengths,
        /// Keep only lengths of this parity.
        #[arg(long, value_enum, default_value = "all")]
        parity: ParityFilter,
        #[command(flatten)]
        common: Common,
    },
    /// Two-point correlations g(1..=K), optionally checked against the integral form.
    Correlations {
        #[command(flatten)]
        density: Density,
        #[arg(long)]
        max_lag: usize,
        #[arg(long)]
        integral: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Law of the maximum of a simple random walk of L steps.
    RwMax {
        #[arg(long = "L")]
        length: usize,
        /// Compare with exhaustive enumeration (L <= 20).
        #[arg(long)]
        brute_check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Variance against the asymptotic prediction over a grid of lengths.
    Regimes {
        #[command(flatten)]
        density: Density,
        #[command(flatten)]
        lengths: Lengths,
        /// Keep only lengths of this parity.
        #[arg(long, value_enum, default_value = "all")]
        parity: ParityFilter,
        #[arg(long, value_enum, default_value = "exact-series")]
        route: RouteArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        dynamics: Dynamics,
        #[arg(long, default_value_t = 100)]
        window_gap: usize,
        /// Band margin s.
        #[arg(long, default_value_t = Margins::default().s)]
        margin_s: f64,
        /// Band margin l.
        #[arg(long, default_value_t = Margins::default().l)]
        margin_l: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum RouteArg {
    ExactSeries,
    ExactSampler,
    Dynamics,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::ExactSeries => Route::ExactSeries,
            RouteArg::ExactSampler => Route::ExactSampler,
            RouteArg::Dynamics => Route::Dynamics,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum RuleArg {
    Continuous,
    ParallelTa,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Continuous => Rule::Continuous,
            RuleArg::ParallelTa => Rule::ParallelTa,
        }
    }
}

/// Exactly one of `--delta` and `--rho`.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Density {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct OptDensity {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Lengths {
    #[arg(long = "L")]
    length: Option<usize>,
    /// `a,b,c` or `odd|even|all:MIN:MAX[:POINTS]`.
    #[arg(long = "L-grid")]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct Dynamics {
    #[arg(long, default_value_t = 1 << 20)]
    ring_size: usize,
    #[arg(long, default_value_t = 50)]
    replicas: u64,
    #[arg(long, value_enum, default_value = "parallel-ta")]
    rule: RuleArg,
    /// Jump events (continuous) or sweeps (parallel) allowed per replica.
    #[arg(long, default_value_t = u64::MAX)]
    max_events: u64,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn apply(self, spec: &mut RunSpec) {
        spec.seed = self.seed;
        spec.out = self.out;
        spec.format = self.format;
    }
}

impl Dynamics {
    fn apply(self, spec: &mut RunSpec) {
        spec.ring_size = self.ring_size;
        spec.replicas = self.replicas;
        spec.rule = self.rule.into();
        spec.max_events = self.max_events;
    }
}

fn to_spec(command: Command) -> RunSpec {
    let mut s = RunSpec::default();
    match command {
        Command::Sample { density, length, samples, common } => {
            s.subcommand = Subcommand::Sample;
            (s.delta, s.rho) = (density.delta, density.rho);
            s.length = Some(length);
            s.samples = samples;
            common.apply(&mut s);
        }
        Command::Simulate { density, dynamics, ensemble, common } => {
            s.subcommand = Subcommand::Simulate;
            (s.delta, s.rho) = (density.delta, density.rho);
            dynamics.apply(&mut s);
            s.ensemble = ensemble;
            common.apply(&mut s);
        }
        Command::Gaps { ensemble, density, dynamics, bins, common } => {
            s.subcommand = Subcommand::Gaps;
            (s.delta, s.rho) = (density.delta, density.rho);
            dynamics.apply(&mut s);
            s.ensemble = ensemble;
            s.bins = bins;
            common.apply(&mut s);
        }
        Command::ExactVariance { density, lengths, parity, common } => {
            s.subcommand = Subcommand::ExactVariance;
            s.parity = parity;
            (s.delta, s.rho) = (density.delta, density.rho);
            (s.length, s.length_grid) = (lengths.length, lengths.grid);
            common.apply(&mut s);
        }
        Command::Correlations { density, max_lag, integral, common } => {
            s.subcommand = Subcommand::Correlations;
            (s.delta, s.rho) = (density.delta, density.rho);
            s.max_lag = Some(max_lag);
            s.integral = integral;
            common.apply(&mut s);
        }
        Command::RwMax { length, brute_check, common } => {
            s.subcommand = Subcommand::RwMax;
            s.length = Some(length);
            s.brute_check = brute_check;
            common.apply(&mut s);
        }
        Command::Regimes {
            density,
            lengths,
            parity,
            route,
            samples,
            dynamics,
            window_gap,
            margin_s,
            margin_l,
            common,
        } => {
            s.subcommand = Subcommand::Regimes;
            s.parity = parity;
            (s.delta, s.rho) = (density.delta, density.rho);
            (s.length, s.length_grid) = (lengths.length, lengths.grid);
            s.route = route.into();
            s.samples = samples;
            dynamics.apply(&mut s);
            s.window_gap = window_gap;
            s.margins = Margins { s: margin_s, l: margin_l };
            common.apply(&mut s);
        }
    }
    s
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FEP_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("FEP_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn load_spec(path: &PathBuf) -> Result<RunSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad run spec {}: {e}", path.display())))
}

fn real_main() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            e.print()?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    let spec = match (cli.spec, cli.command) {
        (Some(path), None) => load_spec(&path)?,
        (None, Some(cmd)) => to_spec(cmd),
        _ => return Err(CliError::usage("give a subcommand or --spec RUN.json (see --help)")),
    };
    configure_threads()?;
    run::execute(&spec)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) if m.starts_with("error:") => eprint!("{m}"),
                _ => eprintln!("{e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
