//! Linear failure rate power series (LFRPS) lifetime distributions.
//!
//! An LFRPS random variable is the minimum of `N` i.i.d. linear failure rate
//! lifetimes `LFR(a, b)`, where `N >= 1` follows a zero-truncated power series
//! law with generating function `C(θ)`. The crate provides
//!
//! - [`powerseries`]: the compounding law (geometric, Poisson, logarithmic,
//!   binomial, degenerate) with closed-form `C` and derivatives;
//! - [`distribution`]: cdf, pdf, survival, hazard, quantile, sampling and
//!   moments of the compound law;
//! - [`estimation`]: direct maximum likelihood and an EM algorithm with
//!   bracketed M-steps and Louis-method standard errors;
//! - [`gof`]: information criteria, K-S / Anderson-Darling / Cramér-von Mises
//!   statistics, likelihood-ratio tests and the TTT transform;
//! - [`simstudy`]: a deterministic Monte Carlo harness for estimator studies.
//!
//! ```
//! use lfrps::{LfrpsDist, LfrpsParams, PowerSeriesFamily};
//!
//! let dist = LfrpsDist::new(LfrpsParams::new(1.0, 0.0, 0.5, PowerSeriesFamily::Geometric)).unwrap();
//! let x = dist.quantile(2.0 / 3.0).unwrap();
//! assert!((x - 2f64.ln()).abs() < 1e-12);
//! ```

pub mod distribution;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod numeric;
pub mod powerseries;
pub mod simstudy;

pub use distribution::{LfrpsDist, LfrpsParams};
pub use error::{Error, Result};
pub use estimation::{FitMethod, FitOptions, FitResult};
pub use gof::{GofReport, KsResult, LrTestResult};
pub use powerseries::PowerSeriesFamily;
pub use simstudy::{SimConfig, SimRow};
