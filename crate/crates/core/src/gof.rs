//! Model comparison and goodness of fit.
//!
//! All empirical-distribution statistics are functions of the fitted cdf at
//! the ordered sample, `F(y_(1)) <= ... <= F(y_(n))`.

use serde::{Deserialize, Serialize};

use crate::distribution::LfrpsDist;
use crate::error::{Error, Result};
use crate::numeric::special::{chi_square_sf, kolmogorov_sf};

/// Cdf values are clipped to `[CLIP, 1 - CLIP]` inside AD and CM.
pub const CLIP: f64 = 1e-12;

/// Anything with a cumulative distribution function on the real line.
pub trait Cdf {
    fn cdf_at(&self, x: f64) -> f64;
}

impl Cdf for LfrpsDist {
    fn cdf_at(&self, x: f64) -> f64 {
        self.cdf(x.max(0.0)).expect("non-negative argument")
    }
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf_at(&self, x: f64) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoCriteria {
    pub aic: f64,
    /// `None` when `n <= p + 1`.
    pub aicc: Option<f64>,
    pub bic: f64,
}

/// AIC `= -2ℓ + 2p`, AICc `= AIC + 2p(p+1)/(n-p-1)`, BIC `= -2ℓ + p log n`.
pub fn info_criteria(loglik: f64, p: usize, n: usize) -> InfoCriteria {
    let pf = p as f64;
    let aic = -2.0 * loglik + 2.0 * pf;
    let aicc = (n > p + 1).then(|| aic + 2.0 * pf * (pf + 1.0) / (n - p - 1) as f64);
    let bic = if p == 0 { -2.0 * loglik } else { -2.0 * loglik + pf * (n as f64).ln() };
    InfoCriteria { aic, aicc, bic }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted_cdf<D: Cdf + ?Sized>(data: &[f64], dist: &D) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v.into_iter().map(|x| dist.cdf_at(x)).collect()
}

fn ks_from_sorted(f: &[f64]) -> f64 {
    let n = f.len() as f64;
    f.iter()
        .enumerate()
        .map(|(i, &fi)| {
            let i = i as f64;
            ((i + 1.0) / n - fi).max(fi - i / n)
        })
        .fold(0.0, f64::max)
}

/// `D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`.
pub fn ks_statistic<D: Cdf + ?Sized>(data: &[f64], dist: &D) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    ks_from_sorted(&sorted_cdf(data, dist))
}

/// K-S statistic with the asymptotic Kolmogorov p-value of `√n D`.
pub fn ks_test<D: Cdf + ?Sized>(data: &[f64], dist: &D) -> Result<KsResult> {
    if data.is_empty() {
        return Err(Error::arg("K-S test needs at least one observation"));
    }
    let d = ks_statistic(data, dist);
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((data.len() as f64).sqrt() * d),
    })
}

/// `AD = -n - Σ (2i-1)/n [log F(y_i) + log(1 - F(y_{n+1-i}))]`.
pub fn ad_statistic<D: Cdf + ?Sized>(data: &[f64], dist: &D) -> f64 {
    let f: Vec<f64> = sorted_cdf(data, dist)
        .into_iter()
        .map(|v| v.clamp(CLIP, 1.0 - CLIP))
        .collect();
    let n = f.len();
    let nf = n as f64;
    let s = crate::numeric::sum((0..n).map(|i| {
        let w = (2 * i + 1) as f64 / nf;
        w * (f[i].ln() + (-f[n - 1 - i]).ln_1p())
    }));
    -nf - s
}

/// `CM = 1/(12n) + Σ ((2i-1)/(2n) - F(y_i))²`.
pub fn cm_statistic<D: Cdf + ?Sized>(data: &[f64], dist: &D) -> f64 {
    let f: Vec<f64> = sorted_cdf(data, dist)
        .into_iter()
        .map(|v| v.clamp(CLIP, 1.0 - CLIP))
        .collect();
    let nf = f.len() as f64;
    let s = crate::numeric::sum(f.iter().enumerate().map(|(i, &fi)| {
        let r = (2 * i + 1) as f64 / (2.0 * nf) - fi;
        r * r
    }));
    1.0 / (12.0 * nf) + s
}

/// Information criteria and EDF statistics at fitted parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub neg2loglik: f64,
    pub aic: f64,
    pub aicc: Option<f64>,
    pub bic: f64,
    pub ks: KsResult,
    pub ad: f64,
    pub cm: f64,
}

impl GofReport {
    /// `p` is the number of estimated parameters.
    pub fn compute<D: Cdf + ?Sized>(data: &[f64], dist: &D, loglik: f64, p: usize) -> Result<Self> {
        let ic = info_criteria(loglik, p, data.len());
        Ok(Self {
            neg2loglik: -2.0 * loglik,
            aic: ic.aic,
            aicc: ic.aicc,
            bic: ic.bic,
            ks: ks_test(data, dist)?,
            ad: ad_statistic(data, dist),
            cm: cm_statistic(data, dist),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTestResult {
    pub lambda: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Slack below zero tolerated for `Λ` before reporting a nesting violation.
pub const LR_SLACK: f64 = 1e-8;

/// `Λ = 2 (ℓ_H1 - ℓ_H0)` referred to `χ²_df`.
pub fn lr_test(loglik_h1: f64, loglik_h0: f64, df: u32) -> Result<LrTestResult> {
    if df == 0 {
        return Err(Error::arg("LR test needs df >= 1"));
    }
    let lambda = 2.0 * (loglik_h1 - loglik_h0);
    if lambda.is_nan() || lambda < -LR_SLACK {
        return Err(Error::arg(format!(
            "alternative log-likelihood {loglik_h1} is below the null {loglik_h0}; models are not nested"
        )));
    }
    let lambda = lambda.max(0.0);
    Ok(LrTestResult { lambda, df, p_value: chi_square_sf(lambda, df)? })
}

/// Scaled total-time-on-test transform: pairs `(i/n, T_i)` with
/// `T_i = (Σ_{j<=i} x_(j) + (n - i) x_(i)) / Σ_j x_(j)`.
pub fn ttt_transform(data: &[f64]) -> Result<Vec<(f64, f64)>> {
    if data.len() < 2 {
        return Err(Error::arg("TTT transform needs at least two observations"));
    }
    if let Some(bad) = data.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::arg(format!("TTT transform needs positive data, got {bad}")));
    }
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let total = crate::numeric::sum(x.iter().copied());
    let mut partial = crate::numeric::NeumaierSum::default();
    let mut out = Vec::with_capacity(n);
    for (i, &xi) in x.iter().enumerate() {
        partial.add(xi);
        let rank = i + 1;
        let t = if rank == n {
            1.0
        } else {
            (partial.value() + (n - rank) as f64 * xi) / total
        };
        out.push((rank as f64 / n as f64, t));
    }
    Ok(out)
}
