//! Safeguarded Newton iteration inside a verified sign-change bracket.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute step size below which iteration stops. Zero means iterate to
    /// machine precision relative to the root.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { abs_tol: 0.0, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootReport {
    pub root: f64,
    /// `f(root)`.
    pub residual: f64,
    pub iterations: usize,
    /// Final bracket `(lo, hi)` with `lo <= root <= hi`.
    pub bracket: (f64, f64),
    /// False if `max_iter` was exhausted before the step tolerance was met.
    pub converged: bool,
}

/// Finds a root of `f` in `[lo, hi]`. `f` returns `(value, derivative)`; the
/// endpoints must have values of opposite sign (or one of them be zero).
/// Newton steps are taken only when they stay inside the current bracket and
/// shrink fast enough; otherwise the bracket is bisected.
pub fn solve_bracketed<F>(f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<RootReport>
where
    F: Fn(f64) -> (f64, f64),
{
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo.is_nan() || fhi.is_nan() {
        return Err(Error::Numerical("NaN at bracket endpoint".into()));
    }
    if flo == 0.0 {
        return Ok(RootReport { root: lo, residual: 0.0, iterations: 0, bracket: (lo, lo), converged: true });
    }
    if fhi == 0.0 {
        return Ok(RootReport { root: hi, residual: 0.0, iterations: 0, bracket: (hi, hi), converged: true });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    // xl is the end with negative value.
    let (mut xl, mut xh) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    let mut dxold = (hi - lo).abs();
    let mut dx = dxold;
    let (mut fx, mut dfx) = f(x);
    for it in 1..=opts.max_iter {
        if fx == 0.0 {
            return Ok(report(x, fx, it, xl, xh, true));
        }
        let newton_unsafe = ((x - xh) * dfx - fx) * ((x - xl) * dfx - fx) > 0.0
            || (2.0 * fx).abs() > (dxold * dfx).abs()
            || !dfx.is_finite();
        if newton_unsafe {
            dxold = dx;
            dx = 0.5 * (xh - xl);
            x = xl + dx;
        } else {
            dxold = dx;
            dx = fx / dfx;
            x -= dx;
        }
        let tol = opts.abs_tol.max(4.0 * f64::EPSILON * x.abs()).max(f64::MIN_POSITIVE);
        (fx, dfx) = f(x);
        if fx < 0.0 {
            xl = x;
        } else {
            xh = x;
        }
        if dx.abs() <= tol || (xh - xl).abs() <= tol {
            return Ok(report(x, fx, it, xl, xh, true));
        }
    }
    Ok(report(x, fx, opts.max_iter, xl, xh, false))
}

fn report(x: f64, fx: f64, iterations: usize, xl: f64, xh: f64, converged: bool) -> RootReport {
    RootReport {
        root: x,
        residual: fx,
        iterations,
        bracket: (xl.min(xh), xl.max(xh)),
        converged,
    }
}
