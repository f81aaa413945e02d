//! JSON documents written by `fit` and `gof`.

use serde::{Deserialize, Serialize};

use lfrps::estimation::BoundaryFlags;
use lfrps::{FitMethod, FitResult, GofReport, LfrpsParams, PowerSeriesFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl From<[f64; 3]> for Triple {
    fn from(v: [f64; 3]) -> Self {
        Self { a: v[0], b: v[1], theta: v[2] }
    }
}

impl From<&LfrpsParams> for Triple {
    fn from(p: &LfrpsParams) -> Self {
        Self { a: p.a, b: p.b, theta: p.theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceIntervals {
    /// Coverage `1 - gamma`.
    pub level: f64,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub theta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReportDocument {
    pub method: FitMethod,
    pub family: PowerSeriesFamily,
    pub n: usize,
    pub estimates: Triple,
    pub se: Option<Triple>,
    pub ci: Option<ConfidenceIntervals>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary: BoundaryFlags,
    pub gof: GofReport,
}

impl FitReportDocument {
    pub fn new(fit: &FitResult, n: usize, gof: GofReport) -> Self {
        let level = 1.0 - fit.gamma;
        Self {
            method: fit.method,
            family: fit.params.family,
            n,
            estimates: Triple::from(&fit.params),
            se: fit.se.map(Triple::from),
            ci: fit.ci.map(|ci| ConfidenceIntervals { level, a: ci[0], b: ci[1], theta: ci[2] }),
            loglik: fit.loglik,
            iterations: fit.iterations,
            converged: fit.converged,
            boundary: fit.boundary,
            gof,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GofDocument {
    pub family: PowerSeriesFamily,
    pub parameters: Triple,
    pub n: usize,
    /// Number of parameters charged in AIC/AICc/BIC.
    pub n_params: usize,
    pub loglik: f64,
    pub gof: GofReport,
}
