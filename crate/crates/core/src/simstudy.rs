//! Monte Carlo harness for the EM estimator.
//!
//! Each replication draws a sample with its own seed derived from the master
//! seed and the replication index, so replications can run in any order on
//! any number of threads. Results are collected in index order and reduced
//! with compensated sums, which makes a cell's output independent of the
//! thread count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{LfrpsDist, LfrpsParams};
use crate::error::{Error, Result};
use crate::estimation::{fit_em, FitOptions, FitResult};
use crate::numeric::NeumaierSum;
use crate::powerseries::PowerSeriesFamily;

/// Where EM starts in each replication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimStart {
    /// The data-driven default `(1/x̄, 1/x̄², family default θ)`.
    #[default]
    Default,
    /// The generating parameter values.
    Truth,
}

fn default_tol() -> f64 {
    1e-5
}

fn default_max_iter() -> usize {
    10_000
}

/// One cell of a simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub family: PowerSeriesFamily,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub start: SimStart,
}

impl SimConfig {
    pub fn new(family: PowerSeriesFamily, truth: [f64; 3], n: usize, reps: usize, seed: u64) -> Self {
        Self {
            family,
            a: truth[0],
            b: truth[1],
            theta: truth[2],
            n,
            reps,
            seed,
            tol: default_tol(),
            max_iter: default_max_iter(),
            start: SimStart::default(),
        }
    }

    pub fn truth(&self) -> LfrpsParams {
        LfrpsParams::new(self.a, self.b, self.theta, self.family)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::arg(format!("reps must be at least 2, got {}", self.reps)));
        }
        if self.n < 3 {
            return Err(Error::arg(format!("n must be at least 3, got {}", self.n)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::arg(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::arg("max_iter must be at least 1"));
        }
        self.truth().validate()
    }
}

/// Summary of one cell. Triples are ordered `(a, b, θ)`; covariance triples
/// are `(a,b), (a,θ), (b,θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub config: SimConfig,
    pub ae: [f64; 3],
    pub bias: [f64; 3],
    pub sim_std: [f64; 3],
    pub em_std: [f64; 3],
    pub sim_cov: [f64; 3],
    pub em_cov: [f64; 3],
    /// Replications that errored or did not converge.
    pub failures: usize,
    /// Converged replications whose information was not positive definite;
    /// they count towards AE and Sim.std but not EM.std.
    pub singular_information: usize,
    /// False when more than half of the replications failed.
    pub valid: bool,
}

/// Column names of [`write_csv`], in order.
pub const CSV_HEADER: [&str; 23] = [
    "n", "a", "b", "theta",
    "ae_a", "ae_b", "ae_theta",
    "bias_a", "bias_b", "bias_theta",
    "sim_std_a", "sim_std_b", "sim_std_theta",
    "em_std_a", "em_std_b", "em_std_theta",
    "sim_cov_ab", "sim_cov_atheta", "sim_cov_btheta",
    "em_cov_ab", "em_cov_atheta", "em_cov_btheta",
    "failures",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` under master seed `seed`.
pub fn replication_seed(seed: u64, rep: u64) -> u64 {
    splitmix64(seed ^ splitmix64(rep))
}

/// Samples and fits replication `rep` of `config`.
pub fn run_replication(config: &SimConfig, rep: u64) -> Result<FitResult> {
    let dist = LfrpsDist::new(config.truth())?;
    let data = dist.sample(config.n, replication_seed(config.seed, rep))?;
    let init = match config.start {
        SimStart::Truth => Some([config.a, config.b, config.theta]),
        SimStart::Default => None,
    };
    let opts = FitOptions { init, tol: config.tol, max_iter: config.max_iter, ..FitOptions::default() };
    fit_em(config.family, &data, &opts)
}

/// Runs every replication of `config` on the current rayon pool and reduces
/// them in replication order.
pub fn run_cell(config: &SimConfig) -> Result<SimRow> {
    config.validate()?;
    let fits: Vec<Option<FitResult>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| run_replication(config, r).ok().filter(|f| f.converged))
        .collect();
    Ok(summarize(config, &fits))
}

fn summarize(config: &SimConfig, fits: &[Option<FitResult>]) -> SimRow {
    let ok: Vec<&FitResult> = fits.iter().flatten().collect();
    let failures = fits.len() - ok.len();
    let k = ok.len() as f64;
    let truth = [config.a, config.b, config.theta];

    let mut ae = [f64::NAN; 3];
    for (i, v) in ae.iter_mut().enumerate() {
        *v = ok.iter().map(|f| f.estimates()[i]).collect::<NeumaierSum>().value() / k;
    }
    let bias: [f64; 3] = std::array::from_fn(|i| ae[i] - truth[i]);
    let centered_mean = |i: usize, j: usize| -> f64 {
        ok.iter()
            .map(|f| {
                let e = f.estimates();
                (e[i] - ae[i]) * (e[j] - ae[j])
            })
            .collect::<NeumaierSum>()
            .value()
            / (k - 1.0)
    };
    let sim_std: [f64; 3] = std::array::from_fn(|i| centered_mean(i, i).sqrt());
    let sim_cov: [f64; 3] = std::array::from_fn(|p| centered_mean(PAIRS[p].0, PAIRS[p].1));

    let with_cov: Vec<_> = ok.iter().filter_map(|f| f.cov.zip(f.se)).collect();
    let m = with_cov.len() as f64;
    let em_std: [f64; 3] =
        std::array::from_fn(|i| with_cov.iter().map(|(_, se)| se[i]).collect::<NeumaierSum>().value() / m);
    let em_cov: [f64; 3] = std::array::from_fn(|p| {
        let (i, j) = PAIRS[p];
        with_cov.iter().map(|(c, _)| c[i][j]).collect::<NeumaierSum>().value() / m
    });

    SimRow {
        config: *config,
        ae,
        bias,
        sim_std,
        em_std,
        sim_cov,
        em_cov,
        failures,
        singular_information: ok.len() - with_cov.len(),
        valid: 2 * failures <= fits.len() && ok.len() >= 2,
    }
}

/// Runs each cell in turn; rows come back in input order.
pub fn run_grid(configs: &[SimConfig]) -> Result<Vec<SimRow>> {
    if configs.is_empty() {
        return Err(Error::arg("simulation grid is empty"));
    }
    configs.iter().try_for_each(SimConfig::validate)?;
    configs.iter().map(run_cell).collect()
}

impl SimRow {
    pub fn csv_fields(&self) -> Vec<String> {
        let c = &self.config;
        let mut out = vec![c.n.to_string(), format_f64(c.a), format_f64(c.b), format_f64(c.theta)];
        for triple in [&self.ae, &self.bias, &self.sim_std, &self.em_std, &self.sim_cov, &self.em_cov] {
            out.extend(triple.iter().map(|&v| format_f64(v)));
        }
        out.push(self.failures.to_string());
        out
    }
}

/// Writes the header and one line per row.
pub fn write_csv<W: Write>(mut w: W, rows: &[SimRow]) -> std::io::Result<()> {
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.csv_fields().join(","))?;
    }
    Ok(())
}
