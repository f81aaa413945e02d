//! Analytic intervals for the roots of the score equations in `a` and `b`
//! (holding the other parameters fixed) and an existence check for the `θ`
//! score root.

use serde::{Deserialize, Serialize};

use crate::distribution::LfrpsParams;
use crate::error::Result;
use crate::numeric::NeumaierSum;
use crate::powerseries::PowerSeriesFamily;

use super::likelihood::{check_data, check_params_relaxed};

/// Interval containing the unique root of one score component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    /// The weight `k` entering the bound: the penalty term evaluated with
    /// the bracketed parameter set to zero.
    pub k: f64,
}

impl RootBracket {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Sufficient condition for the `θ` score to have a root in the native domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaExistence {
    /// False for families in which `θ` does not enter the likelihood.
    pub applicable: bool,
    pub sum_p: f64,
    pub half_n: f64,
    /// Binomial only: `Σ 1/p_i` and the bound `n m / (1 - m)` it is compared
    /// against. The bound is non-positive for every `m >= 2`, which makes that
    /// half of the condition vacuous.
    pub sum_inv_p: Option<f64>,
    pub binomial_bound: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRootBrackets {
    /// Requires `b > 0` and `θ ≠ 0`.
    pub a: Option<RootBracket>,
    /// Requires `a > 0` and `θ ≠ 0`.
    pub b: Option<RootBracket>,
    pub theta: ThetaExistence,
}

/// Computes the brackets at `params`, treating the non-bracketed parameters
/// as fixed at their values in `params`.
pub fn score_root_brackets(params: &LfrpsParams, data: &[f64]) -> Result<ScoreRootBrackets> {
    check_params_relaxed(params)?;
    check_data(data)?;
    let n = data.len() as f64;
    let (mut xmin, mut xmax) = (f64::INFINITY, 0.0f64);
    let mut sx = NeumaierSum::default();
    let mut sx2 = NeumaierSum::default();
    for &x in data {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        sx.add(x);
        sx2.add(x * x);
    }
    let mean = sx.value() / n;
    let mean_sq = sx2.value() / n;
    let (fam, theta, a, b) = (params.family, params.theta, params.a, params.b);
    let penalty = |weight: &dyn Fn(f64) -> f64, kernel: &dyn Fn(f64) -> f64| -> f64 {
        data.iter()
            .map(|&x| {
                let u = theta * kernel(x);
                theta * weight(x) * kernel(x) * fam.a2(u)
            })
            .collect::<NeumaierSum>()
            .value()
    };

    let a_bracket = (b > 0.0 && theta != 0.0).then(|| {
        let k1 = penalty(&|x| x, &|x| (-0.5 * b * x * x).exp());
        let wide = 1.0 / mean;
        let narrow = reciprocal_or_inf(mean + k1 / n);
        let (lo, hi) = if theta > 0.0 {
            (narrow - b * xmax, wide - b * xmin)
        } else {
            (wide - b * xmax, narrow - b * xmin)
        };
        RootBracket { lo, hi, k: k1 }
    });

    let b_bracket = (a > 0.0 && theta != 0.0).then(|| {
        let k2 = penalty(&|x| x * x, &|x| (-a * x).exp());
        let wide = 2.0 / mean_sq;
        let narrow = reciprocal_or_inf(0.5 * mean_sq + 0.5 * k2 / n);
        let (lo, hi) = if theta > 0.0 {
            (narrow - a / xmin, wide - a / xmax)
        } else {
            (wide - a / xmin, narrow - a / xmax)
        };
        RootBracket { lo, hi, k: k2 }
    });

    Ok(ScoreRootBrackets { a: a_bracket, b: b_bracket, theta: theta_existence(params, data) })
}

/// For `θ < 0` the penalty is negative and can swamp the mean, leaving the
/// bracket unbounded above.
fn reciprocal_or_inf(d: f64) -> f64 {
    if d > 0.0 {
        1.0 / d
    } else {
        f64::INFINITY
    }
}

fn theta_existence(params: &LfrpsParams, data: &[f64]) -> ThetaExistence {
    let n = data.len() as f64;
    let fam = params.family;
    let sum_p: f64 = data.iter().map(|&x| params.survival_kernel(x)).collect::<NeumaierSum>().value();
    let mut out = ThetaExistence {
        applicable: fam.theta_identifiable(),
        sum_p,
        half_n: 0.5 * n,
        sum_inv_p: None,
        binomial_bound: None,
        holds: false,
    };
    if !out.applicable {
        return out;
    }
    out.holds = sum_p > out.half_n;
    if let PowerSeriesFamily::Binomial { m } = fam {
        let mf = m as f64;
        let inv: f64 = data.iter().map(|&x| (-params.log_kernel(x)).exp()).collect::<NeumaierSum>().value();
        let bound = n * mf / (1.0 - mf);
        out.sum_inv_p = Some(inv);
        out.binomial_bound = Some(bound);
        out.holds &= inv > bound;
    }
    out
}
