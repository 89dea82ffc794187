//! One pipeline per subcommand. Each builds a [`Table`] from a validated
//! [`RunSpec`]; parallel work is reduced in a fixed order so identical specs
//! give identical tables.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use fep_core::dynamics::gap_histogram;
use fep_core::estimators::WindowStats;
use fep_core::{
    correlation_by_integral, correlations_by_series, half_normal_distance, regime_report, replica_stream,
    walk_max_bruteforce, walk_max_pmf, walk_max_second_moment, BigRational, FrozenEnsemble, GapLaw, RouteParams,
    WindowSampler,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{write_sidecar, Table};
use crate::spec::{RunSpec, Subcommand};

type Res<T> = Result<T, CliError>;

/// Runs the pipeline named by `spec.subcommand` and writes its outputs.
pub fn execute(spec: &RunSpec) -> Res<()> {
    let table = match spec.subcommand {
        Subcommand::Sample => sample(spec)?,
        Subcommand::Simulate => simulate(spec)?,
        Subcommand::Gaps => gaps(spec)?,
        Subcommand::ExactVariance => match exact_variance(spec)? {
            Some(t) => t,
            None => return Ok(()),
        },
        Subcommand::Correlations => correlations(spec)?,
        Subcommand::RwMax => rw_max(spec)?,
        Subcommand::Regimes => regimes(spec)?,
    };
    table.emit(spec)?;
    Ok(())
}

const CHUNK: usize = 1 << 15;

fn sample(spec: &RunSpec) -> Res<Table> {
    let delta = spec.delta()?;
    let length = spec.length()?;
    let sampler = WindowSampler::new(delta, length)?;
    let chunks = spec.samples.div_ceil(CHUNK);
    let parts: Vec<Res<(WindowStats, Vec<Vec<Value>>)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replica_stream(spec.seed, c as u64);
            let mut stats = WindowStats::new(delta, length);
            let mut rows = Vec::new();
            for i in c * CHUNK..spec.samples.min((c + 1) * CHUNK) {
                let w = sampler.sample(&mut rng);
                let d = stats.push_window(&w)?;
                let rec = w.to_record();
                rows.push(vec![
                    json!(i),
                    json!(d.n),
                    json!(d.n_ren),
                    json!(d.sigma),
                    json!(rec.first_renewal_position),
                    json!(rec.left_context),
                    json!(rec.occupancy),
                ]);
            }
            Ok((stats, rows))
        })
        .collect();
    let mut table = Table::new(&["index", "N", "N_ren", "sigma", "first_renewal", "left_context", "occupancy_b64"]);
    let mut total = WindowStats::new(delta, length);
    for part in parts {
        let (stats, rows) = part?;
        total.merge(&stats)?;
        rows.into_iter().for_each(|r| table.push(r));
    }
    table.note("windows", spec.samples);
    if spec.samples >= 2 {
        table.note("mean N", total.mean_n());
        table.note("var N", total.var_n());
        table.note("var N stderr", total.var_n_stderr());
        table.note("mean N_ren", total.mean_nren());
    }
    Ok(table)
}

fn rho(spec: &RunSpec) -> Res<f64> {
    let delta = spec.delta()?;
    Ok(spec.rho.unwrap_or(0.5 - delta))
}

fn run_ensemble(spec: &RunSpec) -> Res<FrozenEnsemble> {
    let rho = rho(spec)?;
    if spec.ring_size < 2 || spec.replicas == 0 {
        return Err(CliError::usage("--ring-size must be >= 2 and --replicas >= 1"));
    }
    Ok(FrozenEnsemble::simulate(spec.ring_size, rho, spec.rule, spec.replicas, spec.seed, spec.max_events)?)
}

fn simulate(spec: &RunSpec) -> Res<Table> {
    let ens = run_ensemble(spec)?;
    if let Some(path) = &spec.ensemble {
        let mut w = BufWriter::new(File::create(path)?);
        ens.write_to(&mut w)?;
        w.flush()?;
        write_sidecar(spec, path)?;
    }
    let mut table = Table::new(&["replica", "freeze_time", "particles", "density"]);
    for r in &ens.replicas {
        let particles = r.occupancy.count_ones();
        table.push(vec![
            json!(r.seed_index),
            json!(r.freeze_time),
            json!(particles),
            json!(particles as f64 / ens.ring_size as f64),
        ]);
    }
    let mean_time = ens.replicas.iter().map(|r| r.freeze_time).sum::<f64>() / ens.replicas.len() as f64;
    table.note("rule", ens.rule.name());
    table.note("mean freeze time", mean_time);
    Ok(table)
}

fn gaps(spec: &RunSpec) -> Res<Table> {
    let ens = match &spec.ensemble {
        Some(path) => FrozenEnsemble::read_from(BufReader::new(File::open(path)?))?,
        None => run_ensemble(spec)?,
    };
    if spec.bins == 0 {
        return Err(CliError::usage("--bins must be positive"));
    }
    let gaps = ens.gaps()?;
    let hist = gap_histogram(&gaps, spec.bins);
    let mut law = GapLaw::new(ens.delta())?;
    let mut table = Table::new(&["gap", "empirical", "exact", "abs_diff"]);
    let mut tv = 0.0;
    for (x, &emp) in hist.iter().enumerate() {
        let (label, exact) = if x < spec.bins {
            (json!(x), law.pmf(x)?)
        } else {
            (json!(format!(">={x}")), law.tail_after(x - 1)?)
        };
        tv += (emp - exact).abs();
        table.push(vec![label, json!(emp), json!(exact), json!((emp - exact).abs())]);
    }
    table.note("gaps", gaps.len());
    table.note("delta", ens.delta());
    table.note("total variation", 0.5 * tv);
    Ok(table)
}

/// `None` when a single value was printed bare.
fn exact_variance(spec: &RunSpec) -> Res<Option<Table>> {
    let delta = spec.delta()?;
    let lengths = spec.lengths()?;
    let max = *lengths.iter().max().unwrap();
    let series = correlations_by_series(delta, max.saturating_sub(1).max(1))?;
    if spec.length.is_some() && spec.out.is_none() {
        println!("{}", series.variance(lengths[0])?);
        return Ok(None);
    }
    let mut table = Table::new(&["delta", "L", "parity", "variance"]);
    for &l in &lengths {
        let parity = if l % 2 == 1 { "odd" } else { "even" };
        table.push(vec![json!(delta), json!(l), json!(parity), json!(series.variance(l)?)]);
    }
    Ok(Some(table))
}

fn correlations(spec: &RunSpec) -> Res<Table> {
    let delta = spec.delta()?;
    let max_lag = match spec.max_lag {
        Some(k) if k > 0 => k,
        _ => return Err(CliError::usage("--max-lag must be a positive integer")),
    };
    if spec.integral && delta == 0.0 {
        return Err(CliError::usage("--integral requires delta > 0"));
    }
    let series = correlations_by_series(delta, max_lag)?;
    let pairs = series.paired_residuals();
    let margins = series.bound_margins();
    let mut columns = vec!["k", "g", "paired_residual", "bound_margin"];
    if spec.integral {
        columns.extend(["integral", "integral_diff"]);
    }
    let mut table = Table::new(&columns);
    let integrals: Vec<Option<f64>> = (1..=max_lag)
        .into_par_iter()
        .map(|k| if spec.integral && k % 2 == 1 { correlation_by_integral(delta, k).ok() } else { None })
        .collect();
    let mut worst_pair = 0.0f64;
    for (i, &g) in series.values().iter().enumerate() {
        let k = i + 1;
        let odd = k % 2 == 1;
        let pair = if odd { pairs.get(i / 2).copied() } else { None };
        worst_pair = worst_pair.max(pair.map_or(0.0, f64::abs));
        let mut row = vec![json!(k), json!(g), json!(pair), json!(odd.then(|| margins[i / 2]))];
        if spec.integral {
            row.push(json!(integrals[i]));
            row.push(json!(integrals[i].map(|v| (v - g).abs())));
        }
        table.push(row);
    }
    table.note("max paired residual", worst_pair);
    if spec.integral {
        let worst = integrals
            .iter()
            .zip(series.values())
            .filter_map(|(i, g)| i.map(|v| (v - g).abs()))
            .fold(0.0f64, f64::max);
        table.note("max series-integral difference", worst);
    }
    Ok(table)
}

fn rw_max(spec: &RunSpec) -> Res<Table> {
    let steps = spec.length()?;
    let brute = if spec.brute_check {
        let exact = walk_max_pmf::<BigRational>(steps)?;
        let oracle = walk_max_bruteforce(steps)?;
        if exact != oracle {
            return Err(CliError::Runtime(format!("walk-max law differs from enumeration at L = {steps}")));
        }
        Some("exact match")
    } else {
        None
    };
    let law = walk_max_pmf::<f64>(steps)?;
    let cdf = law.cdf();
    let mut table = Table::new(&["n", "pmf", "cdf"]);
    for (n, (&p, &c)) in law.pmf().iter().zip(&cdf).enumerate() {
        table.push(vec![json!(n), json!(p), json!(c)]);
    }
    let m2 = walk_max_second_moment::<f64>(steps)?;
    table.note("E M^2", m2.value());
    if let Some(c) = m2.closed_form {
        table.note("E M^2 closed form", c);
    }
    table.note("E M^2 / L", m2.value() / steps as f64);
    table.note("half-normal KS distance", half_normal_distance(steps)?);
    if let Some(b) = brute {
        table.note("brute-force check", b);
    }
    Ok(table)
}

fn regimes(spec: &RunSpec) -> Res<Table> {
    let delta = spec.delta()?;
    let lengths = spec.lengths()?;
    let params = RouteParams {
        samples: spec.samples,
        seed: spec.seed,
        ring_size: spec.ring_size,
        replicas: spec.replicas,
        rule: spec.rule,
        max_events: spec.max_events,
        window_gap: spec.window_gap,
        margins: spec.margins,
    };
    let report = regime_report(delta, &lengths, spec.route, &params)?;
    let mut table =
        Table::new(&["delta", "L", "parity", "route", "variance", "stderr", "predicted", "ratio", "regime", "note"]);
    for r in &report.rows {
        table.push(vec![
            json!(r.delta),
            json!(r.length),
            json!(r.parity.name()),
            json!(r.route.name()),
            json!(r.variance),
            json!(r.stderr),
            json!(r.predicted),
            json!(r.ratio),
            json!(r.regime),
            json!(r.note),
        ]);
    }
    table.note("rows", report.rows.len());
    Ok(table)
}
