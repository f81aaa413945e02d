//! Maximum likelihood estimation of `(a, b, θ)` for a fixed compounding
//! family: the observed-data likelihood and its derivatives, a direct
//! projected Newton / Levenberg-Marquardt maximizer, an EM algorithm with
//! bracketed one-dimensional M-steps, Louis-method information and
//! analytic brackets for the score roots.

mod brackets;
mod direct;
mod em;
mod likelihood;
mod louis;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distribution::LfrpsParams;
use crate::error::{Error, Result};
use crate::numeric::special::normal_upper_quantile;
use crate::powerseries::PowerSeriesFamily;

pub use brackets::{score_root_brackets, RootBracket, ScoreRootBrackets, ThetaExistence};
pub use direct::fit_direct;
pub use em::{em_e_step, em_m_step_a, em_m_step_b, em_m_step_theta, fit_em, EmState, MStepReport};
pub use likelihood::{log_likelihood, observed_information, score};
pub use louis::{latent_variance, louis_information, LouisInformation};

pub(crate) use likelihood::log_likelihood_unchecked;

/// Row-major 3×3 matrix indexed by `(a, b, θ)`.
pub type Mat3 = [[f64; 3]; 3];

/// Score tolerance of the direct maximizer, per observation.
pub const DIRECT_SCORE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Direct,
    Em,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Em => "em",
        })
    }
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" | "mle" => Ok(Self::Direct),
            "em" => Ok(Self::Em),
            other => Err(Error::Parse(format!("unknown fit method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Starting `(a, b, θ)`. Defaults to `(1/x̄, 1/x̄², family default)`.
    pub init: Option<[f64; 3]>,
    /// EM stopping rule: maximum absolute parameter change per iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Two-sided confidence intervals have level `1 - gamma`.
    pub gamma: f64,
    /// Allow `θ < 0` for the geometric family.
    pub extended_domain: bool,
    /// Record the log-likelihood after every iteration.
    pub record_trace: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            init: None,
            tol: 1e-5,
            max_iter: 10_000,
            gamma: 0.05,
            extended_domain: false,
            record_trace: false,
        }
    }
}

/// Which estimates ended on the boundary of the parameter space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFlags {
    pub a_at_zero: bool,
    pub b_at_zero: bool,
    pub theta_at_bound: bool,
}

impl BoundaryFlags {
    pub fn any(&self) -> bool {
        self.a_at_zero || self.b_at_zero || self.theta_at_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: FitMethod,
    pub params: LfrpsParams,
    pub loglik: f64,
    pub score: [f64; 3],
    /// Observed information at the estimate (Louis form for EM).
    pub information: Mat3,
    /// `None` when the information restricted to the free parameters is not
    /// positive definite. A non-identifiable `θ` gets a zero row.
    pub cov: Option<Mat3>,
    pub se: Option<[f64; 3]>,
    /// `[lower, upper]` per parameter at level `1 - gamma`.
    pub ci: Option<[[f64; 2]; 3]>,
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary: BoundaryFlags,
    /// Log-likelihood after each iteration, if requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

impl FitResult {
    pub fn estimates(&self) -> [f64; 3] {
        [self.params.a, self.params.b, self.params.theta]
    }
}

/// Fits `family` to `data` with the chosen method.
pub fn fit(family: PowerSeriesFamily, data: &[f64], method: FitMethod, opts: &FitOptions) -> Result<FitResult> {
    match method {
        FitMethod::Direct => fit_direct(family, data, opts),
        FitMethod::Em => fit_em(family, data, opts),
    }
}

pub(crate) fn check_options(family: PowerSeriesFamily, opts: &FitOptions) -> Result<()> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::arg(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::arg("max_iter must be at least 1"));
    }
    if !(opts.gamma > 0.0 && opts.gamma < 1.0) {
        return Err(Error::arg(format!("gamma must lie in (0, 1), got {}", opts.gamma)));
    }
    if opts.extended_domain && family != PowerSeriesFamily::Geometric {
        return Err(Error::arg(format!("the extended domain is only defined for the geometric family, not {family}")));
    }
    Ok(())
}

pub(crate) fn initial_params(family: PowerSeriesFamily, data: &[f64], opts: &FitOptions) -> Result<LfrpsParams> {
    let p = match opts.init {
        Some([a, b, theta]) => LfrpsParams::new(a, b, theta, family),
        None => {
            let mean = crate::numeric::sum(data.iter().copied()) / data.len() as f64;
            LfrpsParams::new(1.0 / mean, 1.0 / (mean * mean), family.default_theta(), family)
        }
    };
    crate::distribution::check_rates(p.a, p.b)?;
    family.check_theta(p.theta, opts.extended_domain)?;
    Ok(p)
}

/// Parameters that are estimated rather than fixed by the family.
pub(crate) fn free_mask(family: PowerSeriesFamily) -> [bool; 3] {
    [true, true, family.theta_identifiable()]
}

/// Inverts `info` over the free parameters. Returns the covariance and the
/// standard errors, or `None` if the block is not positive definite.
pub(crate) fn covariance(info: &Mat3, free: [bool; 3]) -> Option<(Mat3, [f64; 3])> {
    let idx: Vec<usize> = (0..3).filter(|&i| free[i]).collect();
    let k = idx.len();
    let m = DMatrix::from_fn(k, k, |r, c| info[idx[r]][idx[c]]);
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let inv = m.cholesky()?.inverse();
    let mut cov = [[0.0; 3]; 3];
    let mut se = [0.0; 3];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            cov[i][j] = inv[(r, c)];
        }
        let v = inv[(r, r)];
        if !(v >= 0.0 && v.is_finite()) {
            return None;
        }
        se[i] = v.sqrt();
    }
    Some((cov, se))
}

/// Wald intervals `estimate ± z_{γ/2} se`.
pub(crate) fn wald_intervals(est: [f64; 3], se: &[f64; 3], gamma: f64) -> Result<[[f64; 2]; 3]> {
    let z = normal_upper_quantile(gamma / 2.0)?;
    Ok(std::array::from_fn(|i| [est[i] - z * se[i], est[i] + z * se[i]]))
}

/// Solves the linear system `m δ = rhs` over the free coordinates via a
/// Cholesky factorization; `None` if `m` is not positive definite.
pub(crate) fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    m.clone().cholesky().map(|c| c.solve(rhs))
}

pub(crate) fn finish(
    method: FitMethod,
    params: LfrpsParams,
    information: Mat3,
    iterations: usize,
    converged: bool,
    boundary: BoundaryFlags,
    trace: Vec<f64>,
    data: &[f64],
    opts: &FitOptions,
) -> Result<FitResult> {
    let loglik = log_likelihood_unchecked(&params, data);
    let score = likelihood::score_unchecked(&params, data);
    let est = [params.a, params.b, params.theta];
    let (cov, se, ci) = match covariance(&information, free_mask(params.family)) {
        Some((cov, se)) => {
            let ci = wald_intervals(est, &se, opts.gamma)?;
            (Some(cov), Some(se), Some(ci))
        }
        None => (None, None, None),
    };
    Ok(FitResult {
        method,
        params,
        loglik,
        score,
        information,
        cov,
        se,
        ci,
        gamma: opts.gamma,
        iterations,
        converged,
        boundary,
        trace,
    })
}
