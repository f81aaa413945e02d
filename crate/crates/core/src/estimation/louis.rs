//! Louis decomposition of the observed information into complete-data
//! information minus missing information.

use serde::{Deserialize, Serialize};

use crate::distribution::LfrpsParams;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::powerseries::PowerSeriesFamily;

use super::likelihood::{check_data, check_params_relaxed, ObsTerms};
use super::Mat3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LouisInformation {
    /// Conditional expectation of the complete-data information.
    pub complete: Mat3,
    /// Conditional covariance of the complete-data score.
    pub missing: Mat3,
    /// `complete - missing`.
    pub observed: Mat3,
}

/// `Var(Z | x)` written in terms of `u = θ exp(-a x - b x²/2)`:
/// `u A_2(u) + u² (A_3(u) - A_2(u)²)`.
pub fn latent_variance(family: PowerSeriesFamily, u: f64) -> f64 {
    let a2 = family.a2(u);
    u * a2 + u * u * (family.a3(u) - a2 * a2)
}

pub(crate) fn louis_unchecked(params: &LfrpsParams, data: &[f64]) -> LouisInformation {
    let theta = params.theta;
    let fam = params.family;
    let n = data.len() as f64;
    let mut c = [NeumaierSum::default(); 4];
    let mut v = [NeumaierSum::default(); 5];
    for &x in data {
        let t = ObsTerms::new(params, x);
        let var = t.v();
        let zhat = 1.0 + t.u * t.a2;
        let r = t.inv_rate;
        c[0].add(r * r);
        c[1].add(x * r * r);
        c[2].add(x * x * r * r);
        c[3].add(zhat);
        let x2 = x * x;
        v[0].add(x2 * var);
        v[1].add(x2 * x * var);
        v[2].add(x * var);
        v[3].add(x2 * x2 * var);
        v[4].add(var);
    }
    let (c33, m13, m23, m33) = if fam.theta_identifiable() {
        let c0 = fam.c_unchecked(theta, 0);
        let r1 = fam.c_unchecked(theta, 1) / c0;
        let r2 = fam.c_unchecked(theta, 2) / c0;
        let t2 = theta * theta;
        (
            c[3].value() / t2 + n * (r2 - r1 * r1),
            -v[2].value() / theta,
            -0.5 * v[0].value() / theta,
            v[4].value() / t2,
        )
    } else {
        (0.0, 0.0, 0.0, 0.0)
    };
    let complete = [
        [c[0].value(), c[1].value(), 0.0],
        [c[1].value(), c[2].value(), 0.0],
        [0.0, 0.0, c33],
    ];
    let m11 = v[0].value();
    let m12 = 0.5 * v[1].value();
    let m22 = 0.25 * v[3].value();
    let missing = [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]];
    let observed = std::array::from_fn(|i| std::array::from_fn(|j| complete[i][j] - missing[i][j]));
    LouisInformation { complete, missing, observed }
}

/// Louis information at `params`. Requires `θ ≠ 0`.
pub fn louis_information(params: &LfrpsParams, data: &[f64]) -> Result<LouisInformation> {
    check_params_relaxed(params)?;
    check_data(data)?;
    if params.theta == 0.0 {
        return Err(Error::arg("the Louis information is undefined at θ = 0"));
    }
    Ok(louis_unchecked(params, data))
}
