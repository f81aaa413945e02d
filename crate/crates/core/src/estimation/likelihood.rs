//! Observed-data log-likelihood, score and observed information.
//!
//! With `p_i = exp(-a x_i - b x_i² / 2)`, `u_i = θ p_i` and
//! `A_2 = C''/C'`, `A_3 = C'''/C'` evaluated at `u_i`:
//!
//! ```text
//! ℓ = n log(θ / C(θ)) + Σ log(a + b x_i) - a Σ x_i - (b/2) Σ x_i² + Σ log C'(u_i)
//! ```
//!
//! The second-order terms are expressed through
//! `V_i = u_i A_2 + u_i² (A_3 - A_2²)`, which is also `Var(Z_i | x_i)` of the
//! latent count, so the observed information here and the Louis information
//! of the EM path share one algebraic kernel.

use crate::distribution::LfrpsParams;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

use super::Mat3;

pub(crate) fn check_data(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::arg("data set is empty"));
    }
    if let Some(bad) = data.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::arg(format!("observations must be positive and finite, got {bad}")));
    }
    Ok(())
}

/// Rates must satisfy `a, b >= 0`, `a + b > 0`; `θ` may be anywhere the
/// closed forms are defined (for the geometric family this includes 0).
pub(crate) fn check_params_relaxed(p: &LfrpsParams) -> Result<()> {
    crate::distribution::check_rates(p.a, p.b)?;
    let ok = match p.family {
        crate::PowerSeriesFamily::Geometric => p.theta.is_finite() && p.theta < 1.0,
        fam => fam.in_native_domain(p.theta),
    };
    if ok {
        Ok(())
    } else {
        p.family.check_theta(p.theta, true)
    }
}

/// Per-observation quantities shared by score and information.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ObsTerms {
    /// `1 / (a + b x)`
    pub inv_rate: f64,
    pub p: f64,
    pub u: f64,
    pub a2: f64,
    pub a3: f64,
}

impl ObsTerms {
    pub fn new(params: &LfrpsParams, x: f64) -> Self {
        let p = params.survival_kernel(x);
        let u = params.theta * p;
        Self {
            inv_rate: 1.0 / (params.a + params.b * x),
            p,
            u,
            a2: params.family.a2(u),
            a3: params.family.a3(u),
        }
    }

    /// `u A_2 + u² (A_3 - A_2²)`.
    #[inline]
    pub fn v(&self) -> f64 {
        self.u * self.a2 + self.u * self.u * (self.a3 - self.a2 * self.a2)
    }

    /// `p (A_2 + u (A_3 - A_2²))`, i.e. `V / θ` without the division.
    #[inline]
    pub fn w(&self) -> f64 {
        self.p * (self.a2 + self.u * (self.a3 - self.a2 * self.a2))
    }
}

pub(crate) fn log_likelihood_unchecked(params: &LfrpsParams, data: &[f64]) -> f64 {
    let fam = params.family;
    let mut s = NeumaierSum::default();
    for &x in data {
        let lk = params.log_kernel(x);
        let u = params.theta * lk.exp();
        s.add((params.a + params.b * x).ln() + lk + fam.ln_c_prime(u));
    }
    s.value() + data.len() as f64 * fam.ln_theta_over_c(params.theta)
}

/// Observed-data log-likelihood `ℓ_n(a, b, θ)`.
///
/// Returns `-∞` rather than an error if a term `log(a + b x_i)` degenerates.
pub fn log_likelihood(params: &LfrpsParams, data: &[f64]) -> Result<f64> {
    check_params_relaxed(params)?;
    check_data(data)?;
    Ok(log_likelihood_unchecked(params, data))
}

pub(crate) fn score_unchecked(params: &LfrpsParams, data: &[f64]) -> [f64; 3] {
    let (mut sa, mut sb, mut st) = (NeumaierSum::default(), NeumaierSum::default(), NeumaierSum::default());
    for &x in data {
        let t = ObsTerms::new(params, x);
        let uxa = t.u * t.a2;
        sa.add(t.inv_rate - x - x * uxa);
        sb.add(x * t.inv_rate - 0.5 * x * x * (1.0 + uxa));
        st.add(t.p * t.a2);
    }
    let (l1, _) = params.family.ln_theta_over_c_derivs(params.theta);
    [sa.value(), sb.value(), st.value() + data.len() as f64 * l1]
}

/// Gradient of [`log_likelihood`] with respect to `(a, b, θ)`.
pub fn score(params: &LfrpsParams, data: &[f64]) -> Result<[f64; 3]> {
    check_params_relaxed(params)?;
    check_data(data)?;
    Ok(score_unchecked(params, data))
}

pub(crate) fn observed_information_unchecked(params: &LfrpsParams, data: &[f64]) -> Mat3 {
    let mut acc = [NeumaierSum::default(); 6];
    for &x in data {
        let t = ObsTerms::new(params, x);
        let r2 = t.inv_rate * t.inv_rate;
        let v = t.v();
        let w = t.w();
        let x2 = x * x;
        acc[0].add(r2 - x2 * v);
        acc[1].add(x * r2 - 0.5 * x2 * x * v);
        acc[2].add(x * w);
        acc[3].add(x2 * r2 - 0.25 * x2 * x2 * v);
        acc[4].add(0.5 * x2 * w);
        acc[5].add(-t.p * t.p * (t.a3 - t.a2 * t.a2));
    }
    let (_, l2) = params.family.ln_theta_over_c_derivs(params.theta);
    let v: Vec<f64> = acc.iter().map(|s| s.value()).collect();
    let tt = v[5] - data.len() as f64 * l2;
    [[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], tt]]
}

/// Observed information `-∂²ℓ_n / ∂Θ ∂Θᵀ`, symmetric by construction.
pub fn observed_information(params: &LfrpsParams, data: &[f64]) -> Result<Mat3> {
    check_params_relaxed(params)?;
    check_data(data)?;
    Ok(observed_information_unchecked(params, data))
}
