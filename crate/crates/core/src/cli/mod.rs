//! Batch front end: a TOML config in, a CSV table and a JSON sidecar out.

mod config;
mod output;

pub use config::{Command, Config, GridSection, ModelSection, RunSection};
pub use output::{fmt_f64, RunOutcome};

use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::Path;
use std::time::Instant;

use crate::core_num::RngStream;
use crate::error::{Error, Result};
use crate::experiments::{two_sided_bound_experiment, weak_error_density, weak_error_functional};
use crate::model::{validate_assumptions, TimeGrid};
use crate::parametrix_continuous::density_series_many;
use crate::scheme::{mc_density_estimate, scheme_density_series_many, simulate_path, DiscreteSeriesConfig, SeriesKind};
use output::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Version string in `git describe` style; a build may inject the
/// revision through `SKEWDIFF_GIT_DESCRIBE`.
pub fn version() -> String {
    match option_env!("SKEWDIFF_GIT_DESCRIBE") {
        Some(rev) => rev.to_string(),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

/// Exit status for an error raised while loading or running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

/// Runs `config` on a pool of `config.threads` workers (all cores when
/// unset) and writes `<output>/<command>.{csv,json}`.
pub fn run(config: &Config) -> Result<RunOutcome> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    pool.install(|| run_here(config))
}

fn run_here(config: &Config) -> Result<RunOutcome> {
    let start = Instant::now();
    let (table, result, oracles) = dispatch(config).map_err(|e| context(config.command, e))?;
    let elapsed = start.elapsed().as_secs_f64();
    let meta = json!({
        "command": config.command.name(),
        "version": version(),
        "seed": config.run.seed,
        "threads": config.threads,
        "wall_time_seconds": elapsed,
        "oracles": oracles,
        "config": config,
        "result": result,
    });
    output::write(&config.run.output, config.command.name(), &table, &meta)
}

fn context(cmd: Command, e: Error) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("{}: {m}", cmd.name())),
        Error::Domain(m) => Error::Domain(format!("{}: {m}", cmd.name())),
        Error::Refused(m) => Error::Refused(format!("{}: {m}", cmd.name())),
        Error::Accuracy { context, estimate } => Error::Accuracy { context: format!("{}: {context}", cmd.name()), estimate },
        other => other,
    }
}

type Dispatched = (Table, Value, Vec<String>);

fn dispatch(config: &Config) -> Result<Dispatched> {
    match config.command {
        Command::Simulate => simulate(config),
        Command::Density => density(config),
        Command::RateFunctional => {
            let r = weak_error_functional(&config.experiment()?)?;
            let mut t = Table::new(&["N", "h", "error", "std_error", "slope_running"]);
            let se = r.std_errors.clone().unwrap_or_default();
            for k in 0..r.n_values.len() {
                t.row(vec![r.n_values[k].to_string(), fmt_f64(r.h[k]), fmt_f64(r.errors[k]), fmt_f64(se[k]), opt(r.running_slopes[k])]);
            }
            let oracle = r.oracle.clone();
            Ok((t, serde_json::to_value(&r).expect("report serializes"), vec![oracle]))
        }
        Command::RateDensity => {
            let r = weak_error_density(&config.experiment()?)?;
            let mut t = Table::new(&[
                "N",
                "h",
                "sup_norm_error",
                "normalized_error",
                "slope_running",
                "hybrid_continuous",
                "hybrid_discrete",
                "resolution",
            ]);
            let col = |v: &Option<Vec<f64>>, k: usize| v.as_ref().map_or(String::new(), |v| fmt_f64(v[k]));
            for k in 0..r.n_values.len() {
                t.row(vec![
                    r.n_values[k].to_string(),
                    fmt_f64(r.h[k]),
                    col(&r.sup_errors, k),
                    fmt_f64(r.errors[k]),
                    opt(r.running_slopes[k]),
                    col(&r.hybrid_continuous, k),
                    col(&r.hybrid_discrete, k),
                    col(&r.resolution, k),
                ]);
            }
            let oracle = r.oracle.clone();
            Ok((t, serde_json::to_value(&r).expect("report serializes"), vec![oracle]))
        }
        Command::Bounds => {
            let pair = two_sided_bound_experiment(&config.experiment()?)?;
            let mut t = Table::new(&["side", "fitted_C", "fitted_c", "max_violation", "points", "excluded"]);
            for c in [&pair.upper, &pair.lower] {
                let side = serde_json::to_value(c.side).expect("side serializes");
                t.row(vec![
                    side.as_str().unwrap_or_default().to_string(),
                    fmt_f64(c.fitted_big_c),
                    fmt_f64(c.fitted_c),
                    fmt_f64(c.max_violation),
                    c.points.to_string(),
                    c.excluded.to_string(),
                ]);
            }
            let oracles = vec!["Gaussian bounds fitted over a scanned dilation grid; one step from the closed form, longer spans from the full discrete series".into()];
            Ok((t, serde_json::to_value(&pair).expect("bounds serialize"), oracles))
        }
        Command::Validate => {
            let coeffs = config.model.spec()?.build()?;
            let mut probes: Vec<f64> = (0..=2000).map(|k| -5.0 + 10.0 * k as f64 / 2000.0).collect();
            for &b in coeffs.breakpoints() {
                probes.extend([b - 1e-6, b, b + 1e-6]);
            }
            let report = validate_assumptions(&coeffs, &probes, 200_000);
            let mut t = Table::new(&["check", "passed", "observed", "limit"]);
            for c in &report.checks {
                t.row(vec![c.name.clone(), c.passed.to_string(), fmt_f64(c.observed), fmt_f64(c.limit)]);
            }
            if !report.passed() {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                // the table is still useful, so write it before failing
                output::write(&config.run.output, config.command.name(), &t, &json!({"config": config, "result": report}))?;
                return Err(Error::Refused(format!("assumption checks failed: {}", failed.join(", "))));
            }
            let oracles = vec!["sampled bounds and Hölder quotients on 2001 probe points in [-5, 5] plus breakpoints".into()];
            Ok((t, serde_json::to_value(&report).expect("report serializes"), oracles))
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), fmt_f64)
}

fn simulate(config: &Config) -> Result<Dispatched> {
    let coeffs = config.model.spec()?.build()?;
    let grid = TimeGrid::new(config.grid.t_end, config.n()?)?;
    let (seed, x0) = (config.run.seed, config.run.x0);
    let paths: Vec<_> = (0..config.run.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(&coeffs, &grid, &mut RngStream::new(seed, i), x0))
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["path", "step", "t", "x"]);
    for (i, p) in paths.iter().enumerate() {
        for (k, x) in p.states.iter().enumerate() {
            t.row(vec![i.to_string(), k.to_string(), fmt_f64(grid.time(k)), fmt_f64(*x)]);
        }
    }
    let result = json!({ "n_paths": config.run.n_paths, "steps": grid.steps(), "h": grid.h() });
    let oracles = vec!["each step drawn exactly from the drifted skew Brownian law; path i uses stream (seed, i)".into()];
    Ok((t, result, oracles))
}

fn density(config: &Config) -> Result<Dispatched> {
    let spec = config.experiment()?;
    let coeffs = spec.model.build()?;
    let n = config.n()?;
    let grid = TimeGrid::new(spec.t_end, n)?;
    let ys = spec.density_lattice();
    let full = DiscreteSeriesConfig { kind: SeriesKind::FullDiscrete, max_order: None, ..spec.discrete };
    let p_n = scheme_density_series_many(&coeffs, &grid, &full, 0, n, spec.x0, &ys)?;
    let p = density_series_many(&coeffs, &spec.series, spec.t_end, spec.x0, &ys)?;
    let mc = match config.run.bandwidth {
        Some(bw) => Some(mc_density_estimate(&coeffs, &grid, spec.x0, spec.n_paths, bw, &ys, spec.seed)?),
        None => None,
    };
    let mut cols = vec!["y", "scheme_density", "series_density", "difference", "series_tail_bound"];
    if mc.is_some() {
        cols.extend(["mc_density", "mc_std_error"]);
    }
    let mut t = Table::new(&cols);
    for k in 0..ys.len() {
        let mut row = vec![fmt_f64(ys[k]), fmt_f64(p_n[k].value), fmt_f64(p[k].value), fmt_f64(p[k].value - p_n[k].value), opt(p[k].tail_bound)];
        if let Some(m) = &mc {
            row.extend([fmt_f64(m.estimate[k]), fmt_f64(m.std_error[k])]);
        }
        t.row(row);
    }
    let mut oracles = vec![
        "scheme density from the full discrete series".to_string(),
        format!("diffusion density from the continuous series of order {}", spec.series.order),
    ];
    if mc.is_some() {
        oracles.push("Gaussian kernel estimate over simulated terminal values".into());
    }
    let result = json!({ "scheme": p_n, "series": p, "mc": mc });
    Ok((t, result, oracles))
}

/// Loads, runs and reports; returns the process exit status.
pub fn main_with(config_path: &Path, threads: Option<usize>) -> i32 {
    let mut config = match Config::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if threads.is_some() {
        config.threads = threads;
    }
    match run(&config) {
        Ok(out) => {
            println!("{}", out.csv.display());
            println!("{}", out.json.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
