//! Direct maximization of the observed-data likelihood.
//!
//! Newton steps on the analytic information, damped Levenberg-Marquardt
//! style whenever the information is not positive definite or the step
//! fails to increase the likelihood. Rates are projected onto `[0, ∞)` and
//! `θ` is kept inside its domain by halving the distance to an open bound,
//! stopping `1e-10` short of it. A coordinate on its bound whose score points
//! outwards is held fixed for that iteration.

use nalgebra::{DMatrix, DVector};

use crate::distribution::LfrpsParams;
use crate::error::Result;
use crate::powerseries::PowerSeriesFamily;

use super::likelihood::{check_data, log_likelihood_unchecked, observed_information_unchecked, score_unchecked};
use super::{check_options, finish, free_mask, initial_params, solve_spd, BoundaryFlags, FitMethod, FitOptions, FitResult, DIRECT_SCORE_TOL};

const MAX_DAMPING_TRIES: usize = 60;

/// Closest approach of `θ` to a finite bound of its domain.
const THETA_MARGIN: f64 = 1e-10;

fn theta_bounds(family: PowerSeriesFamily, extended: bool) -> (f64, f64) {
    match family {
        PowerSeriesFamily::Geometric if extended => (f64::NEG_INFINITY, 1.0),
        PowerSeriesFamily::Geometric | PowerSeriesFamily::Logarithmic => (0.0, 1.0),
        _ => (0.0, f64::INFINITY),
    }
}

fn project(cur: &LfrpsParams, step: &[f64; 3], bounds: (f64, f64)) -> LfrpsParams {
    let a = (cur.a + step[0]).max(0.0);
    let b = (cur.b + step[1]).max(0.0);
    let (lo, hi) = (bounds.0 + THETA_MARGIN, bounds.1 - THETA_MARGIN);
    let mut t = cur.theta + step[2];
    if t <= lo {
        t = (cur.theta + 0.5 * (bounds.0 - cur.theta)).max(lo);
    } else if t >= hi {
        t = (cur.theta + 0.5 * (bounds.1 - cur.theta)).min(hi);
    }
    LfrpsParams::new(a, b, t, cur.family)
}

/// Whether coordinate `i` sits on its bound with the score pushing outwards.
fn held(i: usize, est: &[f64; 3], s: &[f64; 3], bounds: (f64, f64)) -> bool {
    match i {
        0 | 1 => est[i] == 0.0 && s[i] <= 0.0,
        _ => {
            (est[2] <= bounds.0 + THETA_MARGIN && s[2] <= 0.0) || (est[2] >= bounds.1 - THETA_MARGIN && s[2] >= 0.0)
        }
    }
}

/// Maximizes the likelihood until every free score component not held at a
/// bound is below `1e-6 n` in absolute value. Standard errors use the
/// inverse observed information at the estimate.
pub fn fit_direct(family: PowerSeriesFamily, data: &[f64], opts: &FitOptions) -> Result<FitResult> {
    check_data(data)?;
    check_options(family, opts)?;
    let n = data.len() as f64;
    let bounds = theta_bounds(family, opts.extended_domain);
    let free = free_mask(family);
    let mut cur = initial_params(family, data, opts)?;
    let mut ll = log_likelihood_unchecked(&cur, data);
    let mut lambda = 0.0f64;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let s = score_unchecked(&cur, data);
        let info = observed_information_unchecked(&cur, data);
        let est = [cur.a, cur.b, cur.theta];
        let active: Vec<usize> = (0..3)
            .filter(|&i| free[i] && !held(i, &est, &s, bounds))
            .collect();
        let gnorm = active.iter().map(|&i| s[i].abs()).fold(0.0, f64::max);
        if gnorm < DIRECT_SCORE_TOL * n {
            converged = true;
            break;
        }
        iterations += 1;
        let k = active.len();
        let h = DMatrix::from_fn(k, k, |r, c| info[active[r]][active[c]]);
        let g = DVector::from_fn(k, |r, _| s[active[r]]);
        let scale: Vec<f64> = (0..k).map(|r| h[(r, r)].abs().max(1e-12)).collect();

        let mut accepted = None;
        for _ in 0..MAX_DAMPING_TRIES {
            let mut m = h.clone();
            for r in 0..k {
                m[(r, r)] += lambda * scale[r];
            }
            let Some(delta) = solve_spd(&m, &g) else {
                lambda = (lambda * 10.0).max(1e-6);
                continue;
            };
            let mut step = [0.0; 3];
            for (r, &i) in active.iter().enumerate() {
                step[i] = delta[r];
            }
            let cand = project(&cur, &step, bounds);
            let cand_ll = log_likelihood_unchecked(&cand, data);
            if cand_ll.is_finite() && cand_ll >= ll {
                accepted = Some((cand, cand_ll));
                lambda = if lambda < 1e-10 { 0.0 } else { lambda / 10.0 };
                break;
            }
            lambda = (lambda * 10.0).max(1e-4);
        }
        let Some((next, next_ll)) = accepted else { break };
        let unchanged = next == cur;
        cur = next;
        ll = next_ll;
        if opts.record_trace {
            trace.push(ll);
        }
        if unchanged {
            break;
        }
    }

    if !converged {
        let s = score_unchecked(&cur, data);
        let est = [cur.a, cur.b, cur.theta];
        converged = (0..3)
            .filter(|&i| free[i] && !held(i, &est, &s, bounds))
            .all(|i| s[i].abs() < DIRECT_SCORE_TOL * n);
    }
    let boundary = BoundaryFlags {
        a_at_zero: cur.a == 0.0,
        b_at_zero: cur.b == 0.0,
        theta_at_bound: free[2]
            && (cur.theta <= bounds.0 + THETA_MARGIN || cur.theta >= bounds.1 - THETA_MARGIN),
    };
    let info = observed_information_unchecked(&cur, data);
    finish(FitMethod::Direct, cur, info, iterations, converged, boundary, trace, data, opts)
}
