use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lfrps::{FitMethod, FitOptions, LfrpsParams, PowerSeriesFamily};
use lfrps_cli::commands;
use lfrps_cli::dataset::read_dataset;
use lfrps_cli::{CliError, CliResult};

/// Linear failure rate power series distributions: sampling, fitting,
/// goodness of fit and simulation studies.
#[derive(Parser)]
#[command(name = "lfrps", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// geometric | poisson | logarithmic | binomial:m | degenerate
    #[arg(long)]
    family: PowerSeriesFamily,
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
}

impl ModelArgs {
    fn params(&self) -> LfrpsParams {
        LfrpsParams::new(self.a, self.b, self.theta, self.family)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample, one value per line.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a family to a dataset and report estimates with goodness of fit.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        family: PowerSeriesFamily,
        #[arg(long, default_value = "em")]
        method: FitMethod,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Confidence level of the Wald intervals.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Allow negative θ for the geometric family.
        #[arg(long)]
        extended: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Goodness-of-fit statistics of given parameters on a dataset.
    Gof {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Parameter count for AIC/AICc/BIC (default: free parameters of the family).
        #[arg(long)]
        n_params: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study of the EM estimator from a JSON config.
    Simstudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Tabulate pdf, cdf and hazard on an even grid.
    Curves {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        x_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaled total-time-on-test transform of a dataset.
    Ttt {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e)),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report documents serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample { model, n, seed, out } => emit(out.as_deref(), &commands::sample_csv(model.params(), n, seed)?),
        Command::Fit { data, family, method, tol, max_iter, level, extended, out } => {
            if !(level > 0.0 && level < 1.0) {
                return Err(CliError::Input(format!("--level must lie in (0, 1), got {level}")));
            }
            let x = read_dataset(&data)?;
            let opts = FitOptions { tol, max_iter, gamma: 1.0 - level, extended_domain: extended, ..FitOptions::default() };
            let doc = commands::fit_document(&x, family, method, &opts)?;
            emit(out.as_deref(), &to_json(&doc))?;
            if doc.converged {
                Ok(())
            } else {
                Err(CliError::NotConverged(format!("{method} fit did not converge in {} iterations", doc.iterations)))
            }
        }
        Command::Gof { data, model, n_params, out } => {
            let x = read_dataset(&data)?;
            emit(out.as_deref(), &to_json(&commands::gof_document(&x, model.params(), n_params)?))
        }
        Command::Simstudy { config, out, threads } => {
            let path = config.display().to_string();
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::io(path.clone(), e))?;
            let configs = commands::parse_sim_configs(&text, &path)?;
            let (csv, rows) = commands::simstudy(&configs, threads)?;
            emit(out.as_deref(), &csv)?;
            let mut invalid = 0;
            for (i, row) in rows.iter().enumerate() {
                if row.failures > 0 {
                    eprintln!("warning: cell {i}: {} of {} replications failed", row.failures, row.config.reps);
                }
                if !row.valid {
                    invalid += 1;
                }
            }
            if invalid > 0 {
                Err(CliError::NotConverged(format!("{invalid} cell(s) invalid: more than half of the replications failed")))
            } else {
                Ok(())
            }
        }
        Command::Curves { model, x_max, points, out } => {
            emit(out.as_deref(), &commands::curves_csv(model.params(), x_max, points)?)
        }
        Command::Ttt { data, out } => {
            let x = read_dataset(&data)?;
            emit(out.as_deref(), &commands::ttt_csv(&x)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
