//! Test-only oracles, written independently of the library's numerics.
#![allow(dead_code)]

use lfrps::estimation::log_likelihood;
use lfrps::{LfrpsDist, LfrpsParams, PowerSeriesFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exp-sinh quadrature of `f` over `(0, ∞)`: `x = exp(π/2 sinh t)`, trapezoid
/// rule in `t`, halving the step until two levels agree to `tol`.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |t: f64| {
        let x = (half_pi * t.sinh()).exp();
        if x == 0.0 || !x.is_finite() {
            return 0.0;
        }
        let v = f(x) * x * half_pi * t.cosh();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 4.5;
    let mut h = 0.5;
    let mut sum: f64 = {
        let mut s = 0.0;
        let mut t = -t_max;
        while t <= t_max + 1e-12 {
            s += term(t);
            t += h;
        }
        s
    };
    let mut prev = sum * h;
    for _ in 0..12 {
        // add the midpoints of the current grid
        let mut t = -t_max + h / 2.0;
        while t < t_max {
            sum += term(t);
            t += h;
        }
        h /= 2.0;
        let est = sum * h;
        if (est - prev).abs() <= tol * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
    }
    prev
}

/// `P(N = n)` straight from the series coefficients.
pub fn pmf(family: PowerSeriesFamily, theta: f64, n: u64) -> f64 {
    let nf = n as f64;
    match family {
        PowerSeriesFamily::Geometric => (1.0 - theta) * theta.powf(nf - 1.0),
        PowerSeriesFamily::Poisson => {
            let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
            (nf * theta.ln() - ln_fact).exp() / theta.exp_m1()
        }
        PowerSeriesFamily::Logarithmic => theta.powf(nf) / (nf * -(1.0 - theta).ln()),
        PowerSeriesFamily::Binomial { m } => {
            if n > m as u64 {
                return 0.0;
            }
            let mut binom = 1.0;
            for k in 0..n {
                binom *= (m as f64 - k as f64) / (k as f64 + 1.0);
            }
            binom * theta.powf(nf) / ((1.0 + theta).powi(m as i32) - 1.0)
        }
        PowerSeriesFamily::DegenerateOne => {
            if n == 1 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// `1 - Σ P(N = n) p(x)^n`, summed until the pmf mass left is below `1e-14`.
pub fn mixture_cdf(params: &LfrpsParams, x: f64) -> f64 {
    let p = (-params.a * x - 0.5 * params.b * x * x).exp();
    let mut mass = 0.0;
    let mut sf = 0.0;
    let mut n = 1;
    while mass < 1.0 - 1e-14 && n < 200_000 {
        let w = pmf(params.family, params.theta, n);
        mass += w;
        sf += w * p.powf(n as f64);
        n += 1;
    }
    1.0 - sf
}

/// Five-point central difference of `f` at `x` with step `h`.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Largest entry-wise difference relative to the largest entry of `reference`.
pub fn normwise_rel(got: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    got.iter().zip(reference).map(|(g, r)| (g - r).abs()).fold(0.0, f64::max) / scale
}

pub fn families() -> Vec<PowerSeriesFamily> {
    vec![
        PowerSeriesFamily::Geometric,
        PowerSeriesFamily::Poisson,
        PowerSeriesFamily::Logarithmic,
        PowerSeriesFamily::Binomial { m: 5 },
        PowerSeriesFamily::DegenerateOne,
    ]
}

/// Native-domain θ values used in grids.
pub fn theta_grid(family: PowerSeriesFamily) -> Vec<f64> {
    match family {
        PowerSeriesFamily::Geometric | PowerSeriesFamily::Logarithmic => vec![0.1, 0.5, 0.9],
        PowerSeriesFamily::Poisson | PowerSeriesFamily::Binomial { .. } => vec![0.2, 1.0, 3.0],
        PowerSeriesFamily::DegenerateOne => vec![1.0],
    }
}

/// `(a, b)` pairs from `{0, 0.3, 1, 2}²` without `a = b = 0`.
pub fn rate_grid() -> Vec<(f64, f64)> {
    let v = [0.0, 0.3, 1.0, 2.0];
    let mut out = Vec::new();
    for &a in &v {
        for &b in &v {
            if a + b > 0.0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Every family × rate pair × θ combination of the grids above.
pub fn grid() -> Vec<LfrpsParams> {
    let mut out = Vec::new();
    for fam in families() {
        for (a, b) in rate_grid() {
            for theta in theta_grid(fam) {
                out.push(LfrpsParams::new(a, b, theta, fam));
            }
        }
    }
    out
}

/// A random model and a sample of size `n` drawn from it.
pub fn instance(seed: u64, n: usize) -> (LfrpsParams, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fam = match seed % 5 {
        0 => PowerSeriesFamily::Geometric,
        1 => PowerSeriesFamily::Poisson,
        2 => PowerSeriesFamily::Logarithmic,
        3 => PowerSeriesFamily::Binomial { m: rng.random_range(2..9) },
        _ => PowerSeriesFamily::Geometric,
    };
    let theta = match fam {
        PowerSeriesFamily::Geometric if seed % 5 == 4 => -rng.random_range(0.1..5.0),
        PowerSeriesFamily::Geometric | PowerSeriesFamily::Logarithmic => rng.random_range(0.05..0.95),
        _ => rng.random_range(0.1..3.0),
    };
    let p = LfrpsParams::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), theta, fam);
    let data = LfrpsDist::new(p).unwrap().sample(n, seed ^ 0xABCD).unwrap();
    (p, data)
}

pub fn with(p: &LfrpsParams, i: usize, v: f64) -> LfrpsParams {
    let mut q = *p;
    match i {
        0 => q.a = v,
        1 => q.b = v,
        _ => q.theta = v,
    }
    q
}

pub fn get(p: &LfrpsParams, i: usize) -> f64 {
    [p.a, p.b, p.theta][i]
}

pub fn step(p: &LfrpsParams, i: usize, rel: f64) -> f64 {
    rel * get(p, i).abs().max(1e-2)
}

/// Evaluation point away from the generating values so the score is not
/// close to zero.
pub fn perturbed(p: &LfrpsParams) -> LfrpsParams {
    let t = match p.family {
        PowerSeriesFamily::Geometric | PowerSeriesFamily::Logarithmic if p.theta > 0.0 => (p.theta * 1.1).min(0.97),
        _ => p.theta * 1.1,
    };
    LfrpsParams::new(p.a * 0.9, p.b * 1.15, t, p.family)
}

/// Negative Hessian from second differences of the log-likelihood alone,
/// Richardson-extrapolated over two step sizes.
pub fn loglik_hessian(p: &LfrpsParams, x: &[f64]) -> [[f64; 3]; 3] {
    let ll = |q: &LfrpsParams| log_likelihood(q, x).unwrap();
    let second = |i: usize, j: usize, scale: f64| {
        let h = |k: usize| scale * get(p, k).abs().max(0.1);
        let (hi, hj) = (h(i), h(j));
        let shift = |si: f64, sj: f64| {
            let q = with(p, i, get(p, i) + si * hi);
            ll(&with(&q, j, get(&q, j) + sj * hj))
        };
        (shift(1.0, 1.0) - shift(1.0, -1.0) - shift(-1.0, 1.0) + shift(-1.0, -1.0)) / (4.0 * hi * hj)
    };
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (coarse, fine) = (second(i, j, 2e-3), second(i, j, 1e-3));
            out[i][j] = -(4.0 * fine - coarse) / 3.0;
        }
    }
    out
}
