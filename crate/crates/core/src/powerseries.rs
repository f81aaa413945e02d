//! Zero-truncated power series laws used as the compounding distribution.
//!
//! `P(N = n) = a_n θ^n / C(θ)` for `n >= 1`, with `C(θ) = Σ a_n θ^n`. Every
//! evaluation of `C` and its derivatives uses the closed form of the family;
//! series only appear in tests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of series terms visited by [`PmfTerms`].
pub const MAX_SERIES_TERMS: u64 = 1_000_000;

/// The compounding law of the latent count `N`.
///
/// On the command line and in config files a family is written as
/// `geometric`, `poisson`, `logarithmic`, `binomial:m` or `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PowerSeriesFamily {
    /// `C(θ) = θ / (1 - θ)`, `0 < θ < 1`; extended to `θ < 1, θ != 0`.
    Geometric,
    /// `C(θ) = e^θ - 1`, `θ > 0`.
    Poisson,
    /// `C(θ) = -log(1 - θ)`, `0 < θ < 1`.
    Logarithmic,
    /// `C(θ) = (1 + θ)^m - 1`, `θ > 0`, with `m` fixed by the model.
    Binomial { m: u32 },
    /// `C(θ) = θ`: a point mass at `N = 1`, which reduces LFRPS to LFR.
    DegenerateOne,
}

impl PowerSeriesFamily {
    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Whether `θ` lies in the family's native domain, where `N` is a genuine
    /// random variable.
    pub fn in_native_domain(&self, theta: f64) -> bool {
        if !theta.is_finite() {
            return false;
        }
        match self {
            Self::Geometric | Self::Logarithmic => theta > 0.0 && theta < 1.0,
            Self::Poisson | Self::Binomial { .. } | Self::DegenerateOne => theta > 0.0,
        }
    }

    /// Whether `θ` is accepted by distribution and estimation code. Only the
    /// geometric family has an extended domain (`θ < 1`, `θ != 0`, i.e.
    /// `α = 1 - θ > 0`).
    pub fn in_domain(&self, theta: f64) -> bool {
        match self {
            Self::Geometric => theta.is_finite() && theta < 1.0 && theta != 0.0,
            _ => self.in_native_domain(theta),
        }
    }

    fn domain_error(&self, theta: f64, extended: bool) -> Error {
        let bound = match (self, extended) {
            (Self::Geometric, true) => "θ < 1, θ != 0",
            (Self::Geometric, false) | (Self::Logarithmic, _) => "0 < θ < 1",
            _ => "θ > 0",
        };
        Error::Domain {
            family: self.name(),
            name: "theta",
            value: theta,
            bound,
        }
    }

    /// Checks `θ` against the extended (`extended = true`) or native domain.
    pub fn check_theta(&self, theta: f64, extended: bool) -> Result<()> {
        let ok = if extended {
            self.in_domain(theta)
        } else {
            self.in_native_domain(theta)
        };
        if ok {
            Ok(())
        } else {
            Err(self.domain_error(theta, extended))
        }
    }

    /// `C(θ)` (`order = 0`) or its first three derivatives.
    pub fn c(&self, theta: f64, order: u8) -> Result<f64> {
        if order > 3 {
            return Err(Error::arg(format!("derivative order {order} not in 0..=3")));
        }
        self.check_theta(theta, true)?;
        Ok(self.c_unchecked(theta, order))
    }

    /// Closed-form `C^{(order)}(u)` without domain checks. Also valid on the
    /// closure of the domain (e.g. `u = 0`), which the distribution code
    /// reaches when the survival kernel underflows.
    pub(crate) fn c_unchecked(&self, u: f64, order: u8) -> f64 {
        match *self {
            Self::Geometric => {
                let q = 1.0 - u;
                match order {
                    0 => u / q,
                    1 => 1.0 / (q * q),
                    2 => 2.0 / (q * q * q),
                    _ => 6.0 / (q * q * q * q),
                }
            }
            Self::Poisson => match order {
                0 => u.exp_m1(),
                _ => u.exp(),
            },
            Self::Logarithmic => {
                let q = 1.0 - u;
                match order {
                    0 => -(-u).ln_1p(),
                    1 => 1.0 / q,
                    2 => 1.0 / (q * q),
                    _ => 2.0 / (q * q * q),
                }
            }
            Self::Binomial { m } => {
                let mf = m as f64;
                let l = u.ln_1p();
                match order {
                    0 => (mf * l).exp_m1(),
                    1 => mf * ((mf - 1.0) * l).exp(),
                    2 => mf * (mf - 1.0) * ((mf - 2.0) * l).exp(),
                    _ => mf * (mf - 1.0) * (mf - 2.0) * ((mf - 3.0) * l).exp(),
                }
            }
            Self::DegenerateOne => match order {
                0 => u,
                1 => 1.0,
                _ => 0.0,
            },
        }
    }

    /// `C^{-1}(y)`.
    pub fn c_inverse(&self, y: f64) -> Result<f64> {
        let range_err = |bound| Error::Range {
            family: self.name(),
            value: y,
            bound,
        };
        if !y.is_finite() {
            return Err(range_err("finite y"));
        }
        match *self {
            Self::Geometric => {
                if y <= -1.0 || y == 0.0 {
                    return Err(range_err("y > -1, y != 0"));
                }
            }
            _ => {
                if y <= 0.0 {
                    return Err(range_err("y > 0"));
                }
            }
        }
        Ok(self.c_inverse_unchecked(y))
    }

    pub(crate) fn c_inverse_unchecked(&self, y: f64) -> f64 {
        match *self {
            Self::Geometric => y / (1.0 + y),
            Self::Poisson => y.ln_1p(),
            Self::Logarithmic => -(-y).exp_m1(),
            Self::Binomial { m } => (y.ln_1p() / m as f64).exp_m1(),
            Self::DegenerateOne => y,
        }
    }

    /// `log a_n`, or `None` when `a_n = 0`.
    pub fn ln_coefficient(&self, n: u64) -> Option<f64> {
        if n == 0 {
            return None;
        }
        match *self {
            Self::Geometric => Some(0.0),
            Self::Poisson => Some(-statrs::function::gamma::ln_gamma(n as f64 + 1.0)),
            Self::Logarithmic => Some(-(n as f64).ln()),
            Self::Binomial { m } => {
                if n > m as u64 {
                    None
                } else {
                    Some(statrs::function::factorial::ln_binomial(m as u64, n))
                }
            }
            Self::DegenerateOne => (n == 1).then_some(0.0),
        }
    }

    /// `c = min{n : a_n > 0}`, the index that governs the `θ → 0` limit.
    /// It is 1 for every supported family.
    pub fn min_index(&self) -> u64 {
        1
    }

    /// `a_1`, the limit of `C(u) / u` as `u → 0`.
    pub(crate) fn leading_coefficient(&self) -> f64 {
        match *self {
            Self::Binomial { m } => m as f64,
            _ => 1.0,
        }
    }

    /// Largest `n` with `a_n > 0`, if the support is finite.
    pub fn max_support(&self) -> Option<u64> {
        match *self {
            Self::Binomial { m } => Some(m as u64),
            Self::DegenerateOne => Some(1),
            _ => None,
        }
    }

    /// `P(N = n)`; only defined on the native domain.
    pub fn pmf(&self, theta: f64, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::arg("pmf is supported on n >= 1"));
        }
        self.check_theta(theta, false)?;
        Ok(match self.ln_coefficient(n) {
            Some(lc) => (lc + n as f64 * theta.ln() - self.ln_c(theta)).exp(),
            None => 0.0,
        })
    }

    /// Iterates `(n, P(N = n))` until the remaining tail mass drops below
    /// `tail_tol`, the support ends, or [`MAX_SERIES_TERMS`] is reached.
    pub fn pmf_terms(&self, theta: f64, tail_tol: f64) -> Result<PmfTerms> {
        self.check_theta(theta, false)?;
        Ok(PmfTerms {
            family: *self,
            ln_theta: theta.ln(),
            ln_c: self.ln_c(theta),
            n: 0,
            ln_coef: 0.0,
            cumulative: crate::numeric::NeumaierSum::default(),
            tail_tol,
            done: false,
        })
    }

    /// `log |C(u)|`, stable for large arguments and for `u` near 0.
    pub(crate) fn ln_c(&self, u: f64) -> f64 {
        match *self {
            Self::Poisson => u + (-(-u).exp_m1()).ln(),
            Self::Binomial { m } => {
                let s = m as f64 * u.ln_1p();
                s + (-(-s).exp_m1()).ln()
            }
            _ => self.c_unchecked(u, 0).abs().ln(),
        }
    }

    /// `log C'(u)`.
    pub(crate) fn ln_c_prime(&self, u: f64) -> f64 {
        match *self {
            Self::Geometric => -2.0 * (-u).ln_1p(),
            Self::Poisson => u,
            Self::Logarithmic => -(-u).ln_1p(),
            Self::Binomial { m } => (m as f64).ln() + (m as f64 - 1.0) * u.ln_1p(),
            Self::DegenerateOne => 0.0,
        }
    }

    /// `C''(u) / C'(u)`.
    pub(crate) fn a2(&self, u: f64) -> f64 {
        match *self {
            Self::Geometric => 2.0 / (1.0 - u),
            Self::Poisson => 1.0,
            Self::Logarithmic => 1.0 / (1.0 - u),
            Self::Binomial { m } => (m as f64 - 1.0) / (1.0 + u),
            Self::DegenerateOne => 0.0,
        }
    }

    /// `C'''(u) / C'(u)`.
    pub(crate) fn a3(&self, u: f64) -> f64 {
        match *self {
            Self::Geometric => 6.0 / ((1.0 - u) * (1.0 - u)),
            Self::Poisson => 1.0,
            Self::Logarithmic => 2.0 / ((1.0 - u) * (1.0 - u)),
            Self::Binomial { m } => {
                let mf = m as f64;
                (mf - 1.0) * (mf - 2.0) / ((1.0 + u) * (1.0 + u))
            }
            Self::DegenerateOne => 0.0,
        }
    }

    /// `u C'(u) / C(u)`, continuous at `u = 0` where it equals 1.
    pub(crate) fn u_c_prime_over_c(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 1.0;
        }
        match *self {
            Self::Geometric => 1.0 / (1.0 - u),
            Self::Poisson => u / -(-u).exp_m1(),
            Self::Logarithmic => u / ((1.0 - u) * -(-u).ln_1p()),
            Self::Binomial { m } => {
                let mf = m as f64;
                let l = u.ln_1p();
                mf * u * ((mf - 1.0) * l).exp() / (mf * l).exp_m1()
            }
            Self::DegenerateOne => 1.0,
        }
    }

    /// `log(θ / C(θ))`, continuous through `θ = 0` for the geometric family.
    pub(crate) fn ln_theta_over_c(&self, theta: f64) -> f64 {
        match *self {
            Self::Geometric => (-theta).ln_1p(),
            Self::DegenerateOne => 0.0,
            _ => theta.ln() - self.ln_c(theta),
        }
    }

    /// First and second derivatives of `log(θ / C(θ))`.
    pub(crate) fn ln_theta_over_c_derivs(&self, theta: f64) -> (f64, f64) {
        match *self {
            Self::Geometric => {
                let q = 1.0 - theta;
                (-1.0 / q, -1.0 / (q * q))
            }
            Self::DegenerateOne => (0.0, 0.0),
            _ => {
                let c = self.c_unchecked(theta, 0);
                let r1 = self.c_unchecked(theta, 1) / c;
                let r2 = self.c_unchecked(theta, 2) / c;
                (1.0 / theta - r1, -1.0 / (theta * theta) - r2 + r1 * r1)
            }
        }
    }

    /// `C(θ) / C'(θ)`, the map whose fixed-point equation is the EM θ-step.
    pub(crate) fn c_over_c_prime(&self, theta: f64) -> f64 {
        match *self {
            Self::Geometric => theta * (1.0 - theta),
            Self::Poisson => -(-theta).exp_m1(),
            Self::Logarithmic => -(1.0 - theta) * (-theta).ln_1p(),
            Self::Binomial { m } => {
                let mf = m as f64;
                -(1.0 + theta) * (-mf * theta.ln_1p()).exp_m1() / mf
            }
            Self::DegenerateOne => theta,
        }
    }

    /// Derivative of [`Self::c_over_c_prime`], i.e. `1 - C C'' / C'^2`.
    pub(crate) fn c_over_c_prime_deriv(&self, theta: f64) -> f64 {
        match *self {
            Self::Geometric => 1.0 - 2.0 * theta,
            Self::Poisson => (-theta).exp(),
            Self::Logarithmic => 1.0 + (-theta).ln_1p(),
            Self::Binomial { m } => {
                let mf = m as f64;
                (1.0 + (mf - 1.0) * (-mf * theta.ln_1p()).exp()) / mf
            }
            Self::DegenerateOne => 1.0,
        }
    }

    /// Whether `θ` enters the likelihood at all. It cancels for the
    /// degenerate law and for `binomial:1`, where `C(θ) = θ`.
    pub fn theta_identifiable(&self) -> bool {
        !matches!(self, Self::DegenerateOne | Self::Binomial { m: 1 })
    }

    /// Default starting value of `θ` for estimation.
    pub fn default_theta(&self) -> f64 {
        match self {
            Self::Geometric | Self::Logarithmic => 0.5,
            _ => 1.0,
        }
    }
}

impl fmt::Display for PowerSeriesFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometric => f.write_str("geometric"),
            Self::Poisson => f.write_str("poisson"),
            Self::Logarithmic => f.write_str("logarithmic"),
            Self::Binomial { m } => write!(f, "binomial:{m}"),
            Self::DegenerateOne => f.write_str("degenerate"),
        }
    }
}

impl FromStr for PowerSeriesFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "geometric" => Ok(Self::Geometric),
            "poisson" => Ok(Self::Poisson),
            "logarithmic" => Ok(Self::Logarithmic),
            "degenerate" => Ok(Self::DegenerateOne),
            other => {
                if let Some(m) = other.strip_prefix("binomial:") {
                    let m: u32 = m
                        .parse()
                        .map_err(|_| Error::Parse(format!("invalid binomial size in {s:?}")))?;
                    if m == 0 {
                        return Err(Error::Parse("binomial size m must be >= 1".into()));
                    }
                    Ok(Self::Binomial { m })
                } else {
                    Err(Error::Parse(format!(
                        "unknown family {s:?}; expected geometric|poisson|logarithmic|binomial:m|degenerate"
                    )))
                }
            }
        }
    }
}

impl TryFrom<String> for PowerSeriesFamily {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PowerSeriesFamily> for String {
    fn from(f: PowerSeriesFamily) -> String {
        f.to_string()
    }
}

/// Iterator over the leading terms of the pmf, see
/// [`PowerSeriesFamily::pmf_terms`].
#[derive(Debug, Clone)]
pub struct PmfTerms {
    family: PowerSeriesFamily,
    ln_theta: f64,
    ln_c: f64,
    n: u64,
    ln_coef: f64,
    cumulative: crate::numeric::NeumaierSum,
    tail_tol: f64,
    done: bool,
}

impl PmfTerms {
    /// Probability mass visited so far.
    pub fn cumulative(&self) -> f64 {
        self.cumulative.value()
    }
}

impl Iterator for PmfTerms {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        if self.done {
            return None;
        }
        self.n += 1;
        let n = self.n;
        if let Some(max) = self.family.max_support() {
            if n > max {
                self.done = true;
                return None;
            }
        }
        if n > MAX_SERIES_TERMS {
            self.done = true;
            return None;
        }
        // ln a_n, updated incrementally.
        self.ln_coef = match self.family {
            PowerSeriesFamily::Geometric | PowerSeriesFamily::DegenerateOne => 0.0,
            PowerSeriesFamily::Poisson => self.ln_coef - (n as f64).ln(),
            PowerSeriesFamily::Logarithmic => -(n as f64).ln(),
            PowerSeriesFamily::Binomial { m } => {
                self.ln_coef + ((m as f64 - n as f64 + 1.0) / n as f64).ln()
            }
        };
        let p = (self.ln_coef + n as f64 * self.ln_theta - self.ln_c).exp();
        self.cumulative.add(p);
        if 1.0 - self.cumulative.value() < self.tail_tol {
            self.done = true;
        }
        Some((n, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PowerSeriesFamily::*;

    const ALL: [PowerSeriesFamily; 5] = [
        Geometric,
        Poisson,
        Logarithmic,
        Binomial { m: 4 },
        DegenerateOne,
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn closed_form_values() {
        assert!((Poisson.c(1.0, 0).unwrap() - 1.718281828459045).abs() < 1e-12);
        assert_eq!(Geometric.c(0.5, 0).unwrap(), 1.0);
        assert_eq!(Geometric.c(0.5, 2).unwrap(), 16.0);
    }

    #[test]
    fn geometric_second_derivative_matches_finite_difference() {
        let h = 1e-6;
        let fd = (Geometric.c(0.5 + h, 1).unwrap() - Geometric.c(0.5 - h, 1).unwrap()) / (2.0 * h);
        assert!(rel(fd, 16.0) < 1e-8);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let thetas = [0.05f64, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9];
        for fam in ALL {
            for &t in &thetas {
                let t = if matches!(fam, Poisson | Binomial { .. }) { 3.0 * t } else { t };
                for k in 0..3u8 {
                    let h = 1e-5 * t.max(1e-3);
                    let fd = (fam.c(t + h, k).unwrap() - fam.c(t - h, k).unwrap()) / (2.0 * h);
                    let exact = fam.c(t, k + 1).unwrap();
                    if exact == 0.0 {
                        assert!(fd.abs() < 1e-9, "{fam} θ={t} k={k}");
                    } else {
                        assert!(rel(fd, exact) < 1e-6, "{fam} θ={t} k={k}: {fd} vs {exact}");
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Geometric.c_inverse(1.0).unwrap(), 0.5);
        assert_eq!(Binomial { m: 2 }.c_inverse(3.0).unwrap(), 1.0);
        let t = Logarithmic.c_inverse(2f64.ln()).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        assert!(rel(Logarithmic.c(t, 0).unwrap(), 2f64.ln()) < 1e-14);
    }

    #[test]
    fn inverse_round_trip_grid() {
        for fam in ALL {
            for i in 1..50 {
                let t = i as f64 / 50.0;
                let t = if matches!(fam, Poisson | Binomial { .. } | DegenerateOne) { 5.0 * t } else { t };
                let y = fam.c(t, 0).unwrap();
                assert!(rel(fam.c_inverse(y).unwrap(), t) < 1e-10, "{fam} {t}");
                assert!(rel(fam.c(fam.c_inverse(y).unwrap(), 0).unwrap(), y) < 1e-10);
            }
        }
        // extended geometric
        for &t in &[-0.3, -2.0, -8.448] {
            let y = Geometric.c(t, 0).unwrap();
            assert!(y < 0.0);
            assert!(rel(Geometric.c_inverse(y).unwrap(), t) < 1e-12);
        }
    }

    #[test]
    fn domain_and_range_errors() {
        assert!(matches!(Logarithmic.c(1.0, 0), Err(Error::Domain { .. })));
        assert!(matches!(Poisson.c(-0.1, 0), Err(Error::Domain { .. })));
        assert!(Geometric.c(-0.5, 0).is_ok());
        assert!(Geometric.c(0.0, 0).is_err());
        assert!(matches!(Poisson.c_inverse(0.0), Err(Error::Range { .. })));
        assert!(matches!(Geometric.c_inverse(-1.0), Err(Error::Range { .. })));
        assert!(Geometric.c(0.5, 4).is_err());
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(Geometric.pmf(0.5, 1).unwrap(), 0.5);
        assert_eq!(DegenerateOne.pmf(2.0, 1).unwrap(), 1.0);
        assert_eq!(DegenerateOne.pmf(2.0, 2).unwrap(), 0.0);
        let p = Poisson.pmf(1.0, 2).unwrap();
        assert!((p - 0.5 / (1f64.exp() - 1.0)).abs() < 1e-15);
        assert!((p - 0.29099).abs() < 1e-5);
        assert!(Geometric.pmf(0.5, 0).is_err());
        assert!(Geometric.pmf(-0.5, 1).is_err());
    }

    #[test]
    fn pmf_normalises() {
        for fam in ALL {
            for &t in &[0.1, 0.5, 0.95] {
                let terms = fam.pmf_terms(t, 1e-12).unwrap();
                let total: f64 = terms.map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12, "{fam} θ={t}: {total}");
            }
        }
    }

    #[test]
    fn pmf_terms_agree_with_pmf() {
        for fam in ALL {
            for (n, p) in fam.pmf_terms(0.7, 1e-12).unwrap().take(30) {
                assert!(rel(p, fam.pmf(0.7, n).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn binomial_tends_to_poisson() {
        let lambda = 1.3;
        let m = 10_000u32;
        let fam = Binomial { m };
        for n in 1..8 {
            let pb = fam.pmf(lambda / m as f64, n).unwrap();
            let pp = Poisson.pmf(lambda, n).unwrap();
            assert!((pb - pp).abs() < 1e-3, "n={n}");
        }
    }

    #[test]
    fn helper_ratios_match_closed_forms() {
        for fam in ALL {
            for &u in &[1e-8, 0.1, 0.4, 0.7] {
                let c1 = fam.c_unchecked(u, 1);
                assert!(rel(fam.a2(u) * c1 + 1e-300, fam.c_unchecked(u, 2) + 1e-300) < 1e-12);
                assert!(rel(fam.a3(u) * c1 + 1e-300, fam.c_unchecked(u, 3) + 1e-300) < 1e-12);
                assert!(rel(fam.u_c_prime_over_c(u), u * c1 / fam.c_unchecked(u, 0)) < 1e-7);
                assert!(rel(fam.ln_c(u), fam.c_unchecked(u, 0).ln()) < 1e-12);
                assert!(rel(fam.ln_c_prime(u).exp(), c1) < 1e-12);
                assert!(rel(fam.c_over_c_prime(u), fam.c_unchecked(u, 0) / c1) < 1e-10);
            }
        }
    }

    #[test]
    fn parse_and_display() {
        for fam in ALL {
            assert_eq!(fam.to_string().parse::<PowerSeriesFamily>().unwrap(), fam);
        }
        assert_eq!("binomial:7".parse::<PowerSeriesFamily>().unwrap(), Binomial { m: 7 });
        assert!("binomial:0".parse::<PowerSeriesFamily>().is_err());
        assert!("negbin".parse::<PowerSeriesFamily>().is_err());
    }
}
