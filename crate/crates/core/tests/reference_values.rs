//! Leukemia-data reference figures that can be recomputed from one another,
//! and EDF statistics against a from-formula rewrite.

use lfrps::gof::{ad_statistic, cm_statistic, info_criteria, lr_test};
use lfrps::{LfrpsDist, LfrpsParams, PowerSeriesFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lfrg_leukemia_information_criteria() {
    let ic = info_criteria(-302.0, 3, 40);
    assert_eq!(ic.aic, 610.0);
    assert!((ic.bic - 615.07).abs() < 0.1, "{}", ic.bic);
    assert!((ic.bic - 615.0).abs() < 0.1);
    assert!((ic.aicc.unwrap() - 610.6).abs() < 0.1);
}

/// Λ from the negative log-likelihoods of the nested models against the
/// LFRG value 302.
#[test]
fn leukemia_likelihood_ratio_statistics() {
    let full = -302.0;
    let lambda = |null: f64, df: u32| lr_test(full, -null, df).unwrap().lambda;
    assert_eq!(lambda(306.0, 1), 8.0);
    assert_eq!(lambda(303.55, 1), 2.0 * (303.55 - 302.0));
    assert!((lambda(303.55, 1) - 3.1).abs() < 1e-12);
    assert_eq!(lambda(306.0, 2), 8.0);
    assert!((lambda(321.45, 2) - 38.9).abs() < 1e-12);
    // the EG reference lists 3, but its log-likelihood of 303.75 gives 3.5
    assert!((lambda(303.75, 1) - 3.5).abs() < 1e-12);
}

fn ad_reference(cdf: &[f64]) -> f64 {
    let n = cdf.len();
    let mut s = 0.0;
    for i in 1..=n {
        let w = (2 * i - 1) as f64 / n as f64;
        s += w * (cdf[i - 1].ln() + (1.0 - cdf[n - i]).ln());
    }
    -(n as f64) - s
}

fn cm_reference(cdf: &[f64]) -> f64 {
    let n = cdf.len() as f64;
    let mut s = 1.0 / (12.0 * n);
    for (k, f) in cdf.iter().enumerate() {
        let i = (k + 1) as f64;
        s += ((2.0 * i - 1.0) / (2.0 * n) - f).powi(2);
    }
    s
}

#[test]
fn edf_statistics_match_reference_formulas() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = LfrpsParams::new(rng.random_range(0.2..2.0), rng.random_range(0.2..2.0), rng.random_range(0.1..0.9), PowerSeriesFamily::Geometric);
        let truth = LfrpsDist::new(p).unwrap();
        let data = truth.sample(rng.random_range(10..200), seed).unwrap();
        // evaluate against a slightly wrong model so the statistics are not tiny
        let model = LfrpsDist::new(LfrpsParams::new(p.a * 1.2, p.b, p.theta, p.family)).unwrap();
        let mut sorted = data.clone();
        sorted.sort_by(f64::total_cmp);
        let f: Vec<f64> = sorted.iter().map(|&x| model.cdf(x).unwrap()).collect();
        let (ad, cm) = (ad_statistic(&data, &model), cm_statistic(&data, &model));
        let (ad_ref, cm_ref) = (ad_reference(&f), cm_reference(&f));
        assert!((ad - ad_ref).abs() <= 1e-10 * ad_ref.abs().max(1.0), "seed {seed}: {ad} vs {ad_ref}");
        assert!((cm - cm_ref).abs() <= 1e-10 * cm_ref.abs().max(1.0), "seed {seed}: {cm} vs {cm_ref}");
    }
}
