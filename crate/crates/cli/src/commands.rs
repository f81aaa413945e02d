//! The work behind each subcommand, returning the text to be written.

use std::fmt::Write as _;

use lfrps::estimation::{fit, log_likelihood};
use lfrps::gof::ttt_transform;
use lfrps::simstudy::{format_f64, run_grid, write_csv, SimConfig, SimRow};
use lfrps::{FitMethod, FitOptions, GofReport, LfrpsDist, LfrpsParams, PowerSeriesFamily};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::report::{FitReportDocument, GofDocument, Triple};

/// `n` draws, one per line, 17 significant digits.
pub fn sample_csv(params: LfrpsParams, n: usize, seed: u64) -> CliResult<String> {
    let dist = LfrpsDist::new(params)?;
    let mut out = String::with_capacity(n * 24);
    for x in dist.sample(n, seed)? {
        writeln!(out, "{}", format_f64(x)).expect("writing to a String");
    }
    Ok(out)
}

/// Number of parameters charged in the information criteria.
pub fn free_parameters(family: PowerSeriesFamily) -> usize {
    if family.theta_identifiable() {
        3
    } else {
        2
    }
}

pub fn fit_document(
    data: &[f64],
    family: PowerSeriesFamily,
    method: FitMethod,
    opts: &FitOptions,
) -> CliResult<FitReportDocument> {
    let res = fit(family, data, method, opts)?;
    let dist = LfrpsDist::new(res.params)?;
    let gof = GofReport::compute(data, &dist, res.loglik, free_parameters(family))?;
    Ok(FitReportDocument::new(&res, data.len(), gof))
}

pub fn gof_document(data: &[f64], params: LfrpsParams, n_params: Option<usize>) -> CliResult<GofDocument> {
    let dist = LfrpsDist::new(params)?;
    let loglik = log_likelihood(&params, data)?;
    let n_params = n_params.unwrap_or_else(|| free_parameters(params.family));
    Ok(GofDocument {
        family: params.family,
        parameters: Triple::from(&params),
        n: data.len(),
        n_params,
        loglik,
        gof: GofReport::compute(data, &dist, loglik, n_params)?,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(SimConfig),
    Many(Vec<SimConfig>),
}

/// A single configuration object or an array of them.
pub fn parse_sim_configs(text: &str, path: &str) -> CliResult<Vec<SimConfig>> {
    let parsed: OneOrMany = serde_json::from_str(text).map_err(|source| CliError::Json { path: path.into(), source })?;
    let configs = match parsed {
        OneOrMany::One(c) => vec![c],
        OneOrMany::Many(v) => v,
    };
    if configs.is_empty() {
        return Err(CliError::Input(format!("{path}: no simulation cells configured")));
    }
    Ok(configs)
}

/// Runs the grid on a pool of `threads` workers (all cores if `None`).
pub fn simstudy(configs: &[SimConfig], threads: Option<usize>) -> CliResult<(String, Vec<SimRow>)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| run_grid(configs))?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).expect("writing to a Vec");
    Ok((String::from_utf8(buf).expect("CSV is ASCII"), rows))
}

/// `points` rows of `x,pdf,cdf,hazard` on an even grid over `[0, x_max]`.
pub fn curves_csv(params: LfrpsParams, x_max: f64, points: usize) -> CliResult<String> {
    if points < 2 {
        return Err(CliError::Input(format!("--points must be at least 2, got {points}")));
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(CliError::Input(format!("--x-max must be positive, got {x_max}")));
    }
    let dist = LfrpsDist::new(params)?;
    let mut out = String::from("x,pdf,cdf,hazard\n");
    for i in 0..points {
        let x = if i + 1 == points { x_max } else { x_max * i as f64 / (points - 1) as f64 };
        writeln!(
            out,
            "{},{},{},{}",
            format_f64(x),
            format_f64(dist.pdf(x)?),
            format_f64(dist.cdf(x)?),
            format_f64(dist.hazard(x)?)
        )
        .expect("writing to a String");
    }
    Ok(out)
}

/// `i_over_n,ttt` rows of the scaled TTT transform.
pub fn ttt_csv(data: &[f64]) -> CliResult<String> {
    let mut out = String::from("i_over_n,ttt\n");
    for (u, t) in ttt_transform(data)? {
        writeln!(out, "{},{}", format_f64(u), format_f64(t)).expect("writing to a String");
    }
    Ok(out)
}
