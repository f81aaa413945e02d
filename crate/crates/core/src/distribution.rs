//! The LFRPS distribution: `X = min(X_1, ..., X_N)` with `X_i ~ LFR(a, b)`
//! i.i.d. and `N` drawn from a zero-truncated power series law.
//!
//! With survival kernel `p(x) = exp(-a x - b x² / 2)`:
//!
//! ```text
//! S(x) = C(θ p(x)) / C(θ)
//! f(x) = θ (a + b x) p(x) C'(θ p(x)) / C(θ)
//! h(x) = θ (a + b x) p(x) C'(θ p(x)) / C(θ p(x))
//! ```
//!
//! Evaluation works from the log kernel `-a x - b x² / 2`; once `θ p(x)`
//! underflows, the log-scale asymptotics `C(u) ~ a_1 u` take over so that
//! survival, density and hazard stay finite at extreme quantiles.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, integrate_half_line, QuadOptions};
use crate::powerseries::PowerSeriesFamily;

/// Pmf tail mass at which mixture and moment series are truncated.
pub const SERIES_TAIL_TOL: f64 = 1e-12;

/// Below this magnitude `θ p(x)` is treated as underflowed.
const TINY: f64 = 1e-280;

/// Parameters `(a, b, θ)` of an LFRPS law together with its family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfrpsParams {
    /// Constant part of the LFR hazard (1/time), `a >= 0`.
    pub a: f64,
    /// Slope of the LFR hazard (1/time²), `b >= 0`.
    pub b: f64,
    pub theta: f64,
    pub family: PowerSeriesFamily,
}

impl LfrpsParams {
    pub fn new(a: f64, b: f64, theta: f64, family: PowerSeriesFamily) -> Self {
        Self { a, b, theta, family }
    }

    /// Checks `a, b >= 0`, `a + b > 0` and `θ` in the (extended) domain.
    pub fn validate(&self) -> Result<()> {
        check_rates(self.a, self.b)?;
        self.family.check_theta(self.theta, true)
    }

    /// `-a x - b x² / 2`.
    #[inline]
    pub fn log_kernel(&self, x: f64) -> f64 {
        -x * (self.a + 0.5 * self.b * x)
    }

    /// `p(x) = exp(-a x - b x² / 2)`, the LFR survival function.
    #[inline]
    pub fn survival_kernel(&self, x: f64) -> f64 {
        self.log_kernel(x).exp()
    }
}

pub(crate) fn check_rates(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 || a + b <= 0.0 {
        return Err(Error::Domain {
            family: "lfr".into(),
            name: "(a, b)",
            value: if a < 0.0 || !a.is_finite() { a } else { b },
            bound: "a >= 0, b >= 0, a + b > 0",
        });
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::arg(format!("lifetime must be >= 0, got {x}")));
    }
    Ok(())
}

/// A validated LFRPS distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfrpsDist {
    params: LfrpsParams,
    /// `C(θ)`.
    c_theta: f64,
    /// `log |C(θ)|`.
    ln_c_theta: f64,
    /// `θ / C(θ)`.
    theta_over_c: f64,
}

/// Outcome of [`LfrpsDist::eps_transform_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsTransformReport {
    /// K-S distance of `Y = X + (a b / 2) X²` from `EPS(a, θ)`.
    pub ks_ab_over_2: f64,
    /// K-S distance of `Y = X + b / (2 a) X²` from `EPS(a, θ)`.
    pub ks_b_over_2a: f64,
    pub n_draws: usize,
}

impl LfrpsDist {
    pub fn new(params: LfrpsParams) -> Result<Self> {
        params.validate()?;
        let fam = params.family;
        let theta = params.theta;
        Ok(Self {
            params,
            c_theta: fam.c_unchecked(theta, 0),
            ln_c_theta: fam.ln_c(theta),
            theta_over_c: fam.ln_theta_over_c(theta).exp(),
        })
    }

    pub fn params(&self) -> &LfrpsParams {
        &self.params
    }

    pub fn family(&self) -> PowerSeriesFamily {
        self.params.family
    }

    /// `log |θ p(x)|`.
    fn ln_abs_u(&self, lk: f64) -> f64 {
        self.params.theta.abs().ln() + lk
    }

    /// `S(x) = C(θ p) / C(θ)` from the log kernel.
    fn sf_from_log_kernel(&self, lk: f64) -> f64 {
        let fam = self.params.family;
        let u = self.params.theta * lk.exp();
        if u.abs() > TINY && self.c_theta.is_finite() {
            fam.c_unchecked(u, 0) / self.c_theta
        } else {
            let ln_c_u = if u.abs() > TINY {
                fam.ln_c(u)
            } else {
                fam.leading_coefficient().ln() + self.ln_abs_u(lk)
            };
            (ln_c_u - self.ln_c_theta).exp()
        }
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(self.sf_from_log_kernel(self.params.log_kernel(x)))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.sf(x)?)
    }

    /// `log f(x)`; `-∞` where the density vanishes (e.g. `x = 0` with `a = 0`).
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(self.ln_pdf_unchecked(x))
    }

    pub(crate) fn ln_pdf_unchecked(&self, x: f64) -> f64 {
        let p = &self.params;
        let lk = p.log_kernel(x);
        let u = p.theta * lk.exp();
        (p.a + p.b * x).ln() + lk + p.family.ln_c_prime(u) + p.family.ln_theta_over_c(p.theta)
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let p = &self.params;
        let lk = p.log_kernel(x);
        let kernel = lk.exp();
        let u = p.theta * kernel;
        let direct = (p.a + p.b * x) * kernel * p.family.c_unchecked(u, 1) * self.theta_over_c;
        if direct.is_finite() && kernel > TINY {
            Ok(direct)
        } else {
            Ok(self.ln_pdf_unchecked(x).exp())
        }
    }

    /// `h(x) = (a + b x) · u C'(u) / C(u)` with `u = θ p(x)`.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let p = &self.params;
        let u = p.theta * p.survival_kernel(x);
        Ok((p.a + p.b * x) * p.family.u_c_prime_over_c(u))
    }

    /// Inverts `F` in closed form: `p = C^{-1}((1 - ξ) C(θ)) / θ`, then solves
    /// `a x + b x² / 2 = -log p`.
    pub fn quantile(&self, xi: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::arg(format!("probability must be in [0, 1), got {xi}")));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        let p = &self.params;
        let fam = p.family;
        // -log p with p = C^{-1}(y) / θ.
        let target = if self.c_theta.is_finite() {
            let y = (1.0 - xi) * self.c_theta;
            -(fam.c_inverse_unchecked(y) / p.theta).ln()
        } else {
            // C(θ) overflowed; only reachable for large binomial/Poisson θ.
            let ln_y = (-xi).ln_1p() + self.ln_c_theta;
            let inv = match fam {
                PowerSeriesFamily::Poisson => ln_y + (-(-ln_y).exp()).ln_1p(),
                PowerSeriesFamily::Binomial { m } => {
                    let s = (ln_y + (-ln_y).exp().ln_1p()) / m as f64;
                    s.exp_m1()
                }
                _ => return Err(Error::Numerical("C(θ) overflow".into())),
            };
            -(inv / p.theta).ln()
        };
        let target = target.max(0.0);
        Ok(lfr_inverse_cumulative_hazard(p.a, p.b, target))
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid probability")
    }

    /// `n` draws by inversion of one uniform each, from a ChaCha8 stream
    /// seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::arg("sample size must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    /// Like [`Self::sample`] but draws from a caller-owned generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            })
            .collect()
    }

    /// `E[X^k]`, `1 <= k <= 8`.
    ///
    /// On the native domain this is the mixture `Σ P(N = n) E[X_(1)^k]` over
    /// `LFR(a n, b n)` components: `k! / (a n)^k` when `b = 0`, otherwise
    /// `k ∫ x^{k-1} exp(-a n x - b n x² / 2) dx` by quadrature. For the
    /// extended geometric domain `x^k f(x)` is integrated directly.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        if !(1..=8).contains(&k) {
            return Err(Error::arg(format!("moment order {k} not in 1..=8")));
        }
        let p = &self.params;
        if !p.family.in_native_domain(p.theta) {
            let scale = self.median().max(f64::MIN_POSITIVE);
            let r = integrate_half_line(
                |x| if x == 0.0 { 0.0 } else { (k as f64 * x.ln() + self.ln_pdf_unchecked(x)).exp() },
                scale,
                QuadOptions::default(),
            )?;
            return Ok(r.value);
        }
        let mut acc = crate::numeric::NeumaierSum::default();
        for (n, w) in p.family.pmf_terms(p.theta, SERIES_TAIL_TOL)? {
            if w == 0.0 {
                continue;
            }
            acc.add(w * lfr_raw_moment(p.a * n as f64, p.b * n as f64, k)?);
        }
        Ok(acc.value())
    }

    /// `E[e^{tX}]` by quadrature. Diverges when `b = 0` and `t >= a`.
    pub fn mgf_numeric(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(1.0);
        }
        let p = &self.params;
        let n_min = p.family.min_index() as f64;
        if p.b == 0.0 && t >= p.a * n_min {
            return Err(Error::Divergent(format!(
                "E[exp(tX)] is infinite for t = {t} >= a·c = {}",
                p.a * n_min
            )));
        }
        let mut scale = self.median().max(f64::MIN_POSITIVE);
        if p.b > 0.0 && t > 0.0 {
            scale = scale.max(t / p.b);
        }
        let r = integrate_half_line(
            |x| (t * x + self.ln_pdf_unchecked(x)).exp(),
            scale,
            QuadOptions::default(),
        )?;
        if !r.value.is_finite() {
            return Err(Error::Divergent(format!("mgf integral overflowed at t = {t}")));
        }
        Ok(r.value)
    }

    /// `Σ P(N = n) (1 - p(x)^n)`, truncated once the remaining pmf mass is
    /// below `tail_tol`. Only defined on the native domain.
    pub fn mixture_cdf_truncated(&self, x: f64, tail_tol: f64) -> Result<f64> {
        check_x(x)?;
        let p = &self.params;
        let lk = p.log_kernel(x);
        let terms = p.family.pmf_terms(p.theta, tail_tol)?;
        Ok(crate::numeric::sum(
            terms.map(|(n, w)| w * -(n as f64 * lk).exp_m1()),
        ))
    }

    /// Draws `n_draws` values of `X` and reports the K-S distance of two
    /// candidate quadratic transforms from the `EPS(a, θ)` law, i.e. the
    /// `b = 0` member of the same family. Requires `a > 0` and `b > 0`.
    pub fn eps_transform_check(&self, n_draws: usize, seed: u64) -> Result<EpsTransformReport> {
        let p = self.params;
        if !(p.a > 0.0 && p.b > 0.0) {
            return Err(Error::arg("transform check requires a > 0 and b > 0"));
        }
        let eps = LfrpsDist::new(LfrpsParams { b: 0.0, ..p })?;
        let xs = self.sample(n_draws, seed)?;
        let ks = |coef: f64| {
            let ys: Vec<f64> = xs.iter().map(|&x| x + coef * x * x).collect();
            crate::gof::ks_statistic(&ys, &eps)
        };
        Ok(EpsTransformReport {
            ks_ab_over_2: ks(p.a * p.b / 2.0),
            ks_b_over_2a: ks(p.b / (2.0 * p.a)),
            n_draws,
        })
    }
}

/// Solves `a x + b x² / 2 = t` for `x >= 0`.
pub(crate) fn lfr_inverse_cumulative_hazard(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if b > 0.0 {
        if a > 0.0 {
            // (-a + sqrt(a² + 2 b t)) / b, rationalised
            2.0 * t / (a + (a * a + 2.0 * b * t).sqrt())
        } else {
            (2.0 * t / b).sqrt()
        }
    } else {
        t / a
    }
}

/// `E[Y^k]` for `Y ~ LFR(a, b)`.
pub(crate) fn lfr_raw_moment(a: f64, b: f64, k: u32) -> Result<f64> {
    let kf = k as f64;
    if b == 0.0 {
        let ln_fact = statrs::function::gamma::ln_gamma(kf + 1.0);
        return Ok((ln_fact - kf * a.ln()).exp());
    }
    let scale = 1.0 / (a + b.sqrt());
    // k ∫ x^{k-1} S(x) dx; split at a few scales so the bulk is resolved.
    let f = |x: f64| {
        let s = (-x * (a + 0.5 * b * x)).exp();
        if k == 1 { s } else { kf * x.powi(k as i32 - 1) * s }
    };
    let opts = QuadOptions::default();
    let head = integrate(f, 0.0, 4.0 * scale, opts)?;
    let tail = integrate_half_line(|y| f(4.0 * scale + y), scale, opts)?;
    Ok(head.value + tail.value)
}

/// The LFR law obtained as `θ → 0+`: `LFR(a c, b c)` with
/// `c = min{n : a_n > 0}`, returned as a degenerate-family parameter set.
pub fn limiting_lfr(family: PowerSeriesFamily, a: f64, b: f64) -> LfrpsParams {
    let c = family.min_index() as f64;
    LfrpsParams::new(a * c, b * c, 1.0, PowerSeriesFamily::DegenerateOne)
}
