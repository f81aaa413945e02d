//! Adaptive Gauss–Kronrod (G10/K21) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = h * x;
        let s = f(c - dx) + f(c + dx);
        kronrod += w * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Integrates `f` over the finite interval `[a, b]` by globally adaptive
/// bisection of the segment with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::arg("integration limits must be finite"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, abs_error: 0.0, subdivisions: 0 });
    }
    let (v, e) = gk21(&f, a, b);
    let mut segs = vec![Segment { a, b, value: v, error: e }];
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(Integral { value: crate::numeric::sum(segs.iter().map(|s| s.value)), abs_error: err, subdivisions: segs.len() });
        }
        if segs.len() >= opts.max_subdivisions {
            return Err(Error::Numerical(format!(
                "quadrature did not reach tolerance: estimate {total}, error {err}"
            )));
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(idx);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Interval cannot be split further; accept what we have.
            let total = crate::numeric::sum(segs.iter().map(|s| s.value).chain([s.value]));
            return Ok(Integral { value: total, abs_error: err, subdivisions: segs.len() + 1 });
        }
        let (v1, e1) = gk21(&f, s.a, mid);
        let (v2, e2) = gk21(&f, mid, s.b);
        segs.push(Segment { a: s.a, b: mid, value: v1, error: e1 });
        segs.push(Segment { a: mid, b: s.b, value: v2, error: e2 });
    }
}

/// Integrates `f` over `[0, ∞)` through the map `x = scale · t / (1 - t)`.
/// `scale` should be of the order of the bulk of the integrand.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, scale: f64, opts: QuadOptions) -> Result<Integral> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::arg("scale must be positive and finite"));
    }
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - t;
        let x = scale * t / q;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (q * q)
        }
    };
    integrate(g, 0.0, 1.0, opts)
}
