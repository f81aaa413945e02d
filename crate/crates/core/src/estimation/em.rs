//! EM algorithm treating the number of competing LFR lifetimes `Z_i` as
//! missing data.
//!
//! The E-step replaces `Z_i` by `ẑ_i = 1 + u_i A_2(u_i)`. Each M-step is a
//! one-dimensional root with an explicit bracket, solved to machine
//! precision; parameters are updated in the order `a`, `b`, `θ`.

use serde::{Deserialize, Serialize};

use crate::distribution::LfrpsParams;
use crate::error::{Error, Result};
use crate::numeric::{solve_bracketed, NeumaierSum, RootOptions};
use crate::powerseries::PowerSeriesFamily;

use super::likelihood::{check_data, check_params_relaxed, log_likelihood_unchecked};
use super::{check_options, finish, initial_params, louis, BoundaryFlags, FitMethod, FitOptions, FitResult};

/// Smallest `θ` an M-step may return for families whose domain is open at 0.
const THETA_FLOOR: f64 = 1e-12;

/// Outcome of one M-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MStepReport {
    pub value: f64,
    /// Interval known to contain the root before iteration started.
    pub bracket: (f64, f64),
    /// The estimating function evaluated at `value`.
    pub residual: f64,
    /// True when the root is not interior and `value` is a domain endpoint.
    pub boundary: bool,
    pub iterations: usize,
}

impl MStepReport {
    fn exact(value: f64, residual: f64) -> Self {
        Self { value, bracket: (value, value), residual, boundary: false, iterations: 0 }
    }

    fn at_boundary(value: f64, bracket: (f64, f64), residual: f64) -> Self {
        Self { value, bracket, residual, boundary: true, iterations: 0 }
    }
}

/// Conditional expectations `E[Z_i | x_i]` at `params`.
pub fn em_e_step(params: &LfrpsParams, data: &[f64]) -> Result<Vec<f64>> {
    check_params_relaxed(params)?;
    check_data(data)?;
    Ok(e_step_unchecked(params, data))
}

fn e_step_unchecked(params: &LfrpsParams, data: &[f64]) -> Vec<f64> {
    data.iter()
        .map(|&x| {
            let u = params.theta * params.survival_kernel(x);
            1.0 + u * params.family.a2(u)
        })
        .collect()
}

fn check_weights(z: &[f64], data: &[f64]) -> Result<()> {
    check_data(data)?;
    if z.len() != data.len() {
        return Err(Error::arg(format!("{} weights for {} observations", z.len(), data.len())));
    }
    if z.iter().any(|w| !w.is_finite()) {
        return Err(Error::arg("non-finite E-step weight"));
    }
    Ok(())
}

fn extremes(data: &[f64]) -> (f64, f64) {
    data.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Root of a decreasing `h` on `[lo, hi]`. When rounding has erased the sign
/// change at a (near-)degenerate bracket, the endpoint with the smaller
/// residual is taken.
fn decreasing_root<F: Fn(f64) -> (f64, f64)>(h: F, lo: f64, hi: f64) -> Result<MStepReport> {
    let (hlo, _) = h(lo);
    let (hhi, _) = h(hi);
    if !(hlo.is_finite() && hhi.is_finite()) {
        return Err(Error::Numerical(format!("M-step function not finite on [{lo}, {hi}]")));
    }
    if hlo < 0.0 || hhi > 0.0 || lo == hi {
        let (v, r) = if hlo.abs() <= hhi.abs() { (lo, hlo) } else { (hi, hhi) };
        return Ok(MStepReport { value: v, bracket: (lo, hi), residual: r, boundary: false, iterations: 0 });
    }
    let rep = solve_bracketed(h, lo, hi, RootOptions::default())?;
    if !rep.converged {
        return Err(Error::Numerical(format!("M-step root did not converge on [{lo}, {hi}]")));
    }
    Ok(MStepReport { value: rep.root, bracket: (lo, hi), residual: rep.residual, boundary: false, iterations: rep.iterations })
}

/// Updates `a` given `b`: root of `Σ 1/(a + b x_i) - Σ ẑ_i x_i` on
/// `[n/c₁ - b x₍ₙ₎, n/c₁ - b x₍₁₎] ∩ [0, ∞)`, or `a = 0` if none is positive.
pub fn em_m_step_a(b: f64, z: &[f64], data: &[f64]) -> Result<MStepReport> {
    check_weights(z, data)?;
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::arg(format!("b must be non-negative, got {b}")));
    }
    let n = data.len() as f64;
    let c1: f64 = z.iter().zip(data).map(|(w, x)| w * x).collect::<NeumaierSum>().value();
    if !(c1 > 0.0) {
        return Err(Error::Numerical(format!("weighted sum c1 = {c1} is not positive")));
    }
    if b == 0.0 {
        return Ok(MStepReport::exact(n / c1, 0.0));
    }
    let (xmin, xmax) = extremes(data);
    let h = |a: f64| {
        let mut v = NeumaierSum::default();
        let mut d = NeumaierSum::default();
        for &x in data {
            let r = 1.0 / (a + b * x);
            v.add(r);
            d.add(-r * r);
        }
        (v.value() - c1, d.value())
    };
    let lo = n / c1 - b * xmax;
    let hi = n / c1 - b * xmin;
    if hi <= 0.0 || h(0.0).0 <= 0.0 {
        return Ok(MStepReport::at_boundary(0.0, (lo, hi), h(0.0).0));
    }
    decreasing_root(h, lo.max(0.0), hi).map(|r| MStepReport { bracket: (lo, hi), ..r })
}

/// Updates `b` given `a`: root of `Σ x_i/(a + b x_i) - ½ Σ ẑ_i x_i²` on
/// `[2n/c₂ - a/x₍₁₎, 2n/c₂ - a/x₍ₙ₎] ∩ [0, ∞)`, or `b = 0` if none is positive.
pub fn em_m_step_b(a: f64, z: &[f64], data: &[f64]) -> Result<MStepReport> {
    check_weights(z, data)?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::arg(format!("a must be non-negative, got {a}")));
    }
    let n = data.len() as f64;
    let c2: f64 = z.iter().zip(data).map(|(w, x)| w * x * x).collect::<NeumaierSum>().value();
    if !(c2 > 0.0) {
        return Err(Error::Numerical(format!("weighted sum c2 = {c2} is not positive")));
    }
    if a == 0.0 {
        return Ok(MStepReport::exact(2.0 * n / c2, 0.0));
    }
    let (xmin, xmax) = extremes(data);
    let h = |b: f64| {
        let mut v = NeumaierSum::default();
        let mut d = NeumaierSum::default();
        for &x in data {
            let r = x / (a + b * x);
            v.add(r);
            d.add(-r * r);
        }
        (v.value() - 0.5 * c2, d.value())
    };
    let lo = 2.0 * n / c2 - a / xmin;
    let hi = 2.0 * n / c2 - a / xmax;
    if hi <= 0.0 || h(0.0).0 <= 0.0 {
        return Ok(MStepReport::at_boundary(0.0, (lo, hi), h(0.0).0));
    }
    decreasing_root(h, lo.max(0.0), hi).map(|r| MStepReport { bracket: (lo, hi), ..r })
}

/// Updates `θ`: root of `θ - c̄ C(θ)/C'(θ)` with `c̄ = Σ ẑ_i / n`.
///
/// For the degenerate law and `binomial:1` the equation carries no
/// information and `current_theta` is returned unchanged.
pub fn em_m_step_theta(family: PowerSeriesFamily, z: &[f64], current_theta: f64) -> Result<MStepReport> {
    if z.is_empty() || z.iter().any(|w| !w.is_finite()) {
        return Err(Error::arg("E-step weights must be finite and non-empty"));
    }
    if !family.theta_identifiable() {
        return Ok(MStepReport::exact(current_theta, 0.0));
    }
    let n = z.len() as f64;
    let c0: f64 = z.iter().copied().collect::<NeumaierSum>().value();
    let cbar = c0 / n;
    let h = |t: f64| {
        (
            t - cbar * family.c_over_c_prime(t),
            1.0 - cbar * family.c_over_c_prime_deriv(t),
        )
    };
    if family == PowerSeriesFamily::Geometric {
        // θ = c̄ θ (1 - θ) solves in closed form; valid on the extended domain too
        let t = 1.0 - n / c0;
        return Ok(MStepReport::exact(t, h(t).0));
    }
    if !(cbar > 1.0) {
        return Ok(MStepReport::at_boundary(THETA_FLOOR, (0.0, 0.0), h(THETA_FLOOR).0));
    }
    let (lo, hi) = match family {
        PowerSeriesFamily::Poisson => (cbar.ln(), cbar),
        PowerSeriesFamily::Logarithmic => (-(1.0 / cbar - 1.0).exp_m1(), 1.0 - f64::EPSILON),
        PowerSeriesFamily::Binomial { m } => {
            let mf = m as f64;
            if cbar >= mf {
                return Err(Error::Numerical(format!("mean weight {cbar} reaches m = {m}")));
            }
            let lo = (cbar * (mf - 1.0) / (mf - cbar)).powf(1.0 / mf) - 1.0;
            let mut hi = 2.0 * cbar / (mf - cbar);
            while h(hi).0 <= 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::Numerical("binomial θ bracket diverged".into()));
                }
            }
            (lo, hi)
        }
        PowerSeriesFamily::Geometric | PowerSeriesFamily::DegenerateOne => unreachable!(),
    };
    let lo = lo.max(THETA_FLOOR);
    // h is increasing in θ, so solve -h on the bracket
    let rep = decreasing_root(|t| {
        let (v, d) = h(t);
        (-v, -d)
    }, lo, hi)?;
    Ok(MStepReport { bracket: (lo, hi), residual: -rep.residual, ..rep })
}

/// Running state of the EM iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmState {
    pub params: LfrpsParams,
    pub iteration: usize,
    /// Largest absolute parameter change in the last iteration.
    pub last_change: f64,
    pub boundary: BoundaryFlags,
}

impl EmState {
    pub fn new(params: LfrpsParams) -> Self {
        Self { params, iteration: 0, last_change: f64::INFINITY, boundary: BoundaryFlags::default() }
    }

    /// One E-step followed by the three M-steps.
    pub fn step(&mut self, data: &[f64]) -> Result<()> {
        let z = e_step_unchecked(&self.params, data);
        let ra = em_m_step_a(self.params.b, &z, data)?;
        let rb = em_m_step_b(ra.value, &z, data)?;
        let rt = em_m_step_theta(self.params.family, &z, self.params.theta)?;
        if ra.value == 0.0 && rb.value == 0.0 {
            return Err(Error::Numerical("both rate parameters collapsed to zero".into()));
        }
        let old = self.params;
        self.params = LfrpsParams::new(ra.value, rb.value, rt.value, old.family);
        self.last_change = (ra.value - old.a).abs().max((rb.value - old.b).abs()).max((rt.value - old.theta).abs());
        self.iteration += 1;
        self.boundary = BoundaryFlags { a_at_zero: ra.boundary, b_at_zero: rb.boundary, theta_at_bound: rt.boundary };
        Ok(())
    }
}

/// Runs EM from `opts.init` (or the default start) until the largest
/// parameter change falls below `opts.tol`. Standard errors come from the
/// Louis information.
pub fn fit_em(family: PowerSeriesFamily, data: &[f64], opts: &FitOptions) -> Result<FitResult> {
    check_data(data)?;
    check_options(family, opts)?;
    let mut state = EmState::new(initial_params(family, data, opts)?);
    let mut trace = Vec::new();
    let mut converged = false;
    while state.iteration < opts.max_iter {
        state.step(data)?;
        if !opts.extended_domain {
            family.check_theta(state.params.theta, false).map_err(|e| Error::Numerical(format!("EM left the domain: {e}")))?;
        }
        if opts.record_trace {
            trace.push(log_likelihood_unchecked(&state.params, data));
        }
        if state.last_change < opts.tol {
            converged = true;
            break;
        }
    }
    let info = louis::louis_unchecked(&state.params, data).observed;
    finish(FitMethod::Em, state.params, info, state.iteration, converged, state.boundary, trace, data, opts)
}
