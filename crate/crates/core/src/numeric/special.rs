//! Distribution tails used by the goodness-of-fit code.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Upper `p` quantile of the standard normal, `z` with `P(Z > z) = p`.
pub fn normal_upper_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::arg(format!("probability {p} not in (0, 1)")));
    }
    let n = Normal::standard();
    Ok(n.inverse_cdf(1.0 - p))
}

/// `P(χ²_df > x)`.
pub fn chi_square_sf(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::arg("chi-square df must be >= 1"));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    let d = ChiSquared::new(df as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(d.sf(x))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(t) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2 k² t²)`.
///
/// For small `t` the alternating series converges slowly, so the equivalent
/// theta-function form `1 - √(2π)/t Σ exp(-(2k-1)² π² / (8 t²))` is used.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if !(t > 0.0) {
        return 1.0;
    }
    if t < 1.0 {
        let mut s = 0.0;
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * t * t);
        for k in 1..=50u32 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * c).exp();
            s += term;
            if term < 1e-17 * s.max(1e-300) {
                break;
            }
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / t * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100u32 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * t * t).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-10 * 1e-7 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}
