use lfrps::gof::{ad_statistic, cm_statistic, info_criteria, ks_statistic, lr_test};
use lfrps::simstudy::{run_grid, SimConfig};
use lfrps::{LfrpsDist, LfrpsParams, PowerSeriesFamily};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = PowerSeriesFamily> {
    prop_oneof![
        Just(PowerSeriesFamily::Geometric),
        Just(PowerSeriesFamily::Poisson),
        Just(PowerSeriesFamily::Logarithmic),
        (1u32..12).prop_map(|m| PowerSeriesFamily::Binomial { m }),
        Just(PowerSeriesFamily::DegenerateOne),
    ]
}

fn params() -> impl Strategy<Value = LfrpsParams> {
    (family(), 0.0..3.0f64, 0.0..3.0f64, 0.02..0.98f64, any::<bool>())
        .prop_filter("a and b both zero", |(_, a, b, _, _)| a + b > 1e-3)
        .prop_map(|(fam, a, b, t, neg)| {
            let theta = match fam {
                PowerSeriesFamily::Geometric if neg => -5.0 * t,
                PowerSeriesFamily::Geometric | PowerSeriesFamily::Logarithmic => t,
                PowerSeriesFamily::DegenerateOne => 1.0,
                _ => 4.0 * t,
            };
            LfrpsParams::new(a, b, theta, fam)
        })
}

fn dataset() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..10.0f64, 5..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone_and_inverted_by_quantile(p in params(), xi in 0.001..0.999f64, x in 0.0..5.0f64, dx in 0.0..2.0f64) {
        let d = LfrpsDist::new(p).unwrap();
        let (f0, f1) = (d.cdf(x).unwrap(), d.cdf(x + dx).unwrap());
        prop_assert!((0.0..=1.0).contains(&f0) && f0 <= f1);
        prop_assert!((d.sf(x).unwrap() + f0 - 1.0).abs() < 1e-15);
        prop_assert!(d.pdf(x).unwrap() >= 0.0);
        let q = d.quantile(xi).unwrap();
        prop_assert!((d.cdf(q).unwrap() - xi).abs() < 1e-9, "{:?} {} {}", p, xi, q);
    }

    #[test]
    fn c_inverse_round_trip(p in params()) {
        prop_assume!(p.family.theta_identifiable());
        let fam = p.family;
        let y = fam.c(p.theta, 0).unwrap();
        let back = fam.c_inverse(y).unwrap();
        prop_assert!((back - p.theta).abs() <= 1e-9 * (1.0 + p.theta.abs()), "{:?} {}", p, back);
    }

    #[test]
    fn info_criteria_are_linear_in_parameter_count(ll in -1e4..1e4f64, p in 0usize..10, n in 20usize..1000) {
        let (lo, hi) = (info_criteria(ll, p, n), info_criteria(ll, p + 1, n));
        prop_assert!((hi.aic - lo.aic - 2.0).abs() < 1e-9);
        prop_assert!((hi.bic - lo.bic - (n as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn lr_p_value_decreases_in_lambda(ll0 in -1e3..0.0f64, d1 in 0.0..20.0f64, d2 in 0.0..20.0f64, df in 1u32..4) {
        let small = lr_test(ll0 + d1.min(d2), ll0, df).unwrap();
        let large = lr_test(ll0 + d1.max(d2), ll0, df).unwrap();
        prop_assert!(large.lambda >= small.lambda);
        prop_assert!(large.p_value <= small.p_value);
    }

    #[test]
    fn edf_statistics_survive_probability_integral_transform(p in params(), x in dataset()) {
        let d = LfrpsDist::new(p).unwrap();
        let u: Vec<f64> = x.iter().map(|&v| d.cdf(v).unwrap()).collect();
        let uniform = |t: f64| t.clamp(0.0, 1.0);
        prop_assert!((ks_statistic(&x, &d) - ks_statistic(&u, &uniform)).abs() < 1e-12);
        prop_assert!((ad_statistic(&x, &d) - ad_statistic(&u, &uniform)).abs() < 1e-12 * (1.0 + ad_statistic(&x, &d).abs()));
        prop_assert!((cm_statistic(&x, &d) - cm_statistic(&u, &uniform)).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_reproducible(p in params(), seed in any::<u64>()) {
        let d = LfrpsDist::new(p).unwrap();
        let s = d.sample(20, seed).unwrap();
        prop_assert_eq!(&s, &d.sample(20, seed).unwrap());
        prop_assert!(s.iter().all(|&v| v > 0.0 && v.is_finite()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn grid_rows_do_not_depend_on_cell_order(seed in any::<u64>()) {
        let first = SimConfig::new(PowerSeriesFamily::Geometric, [0.4, 0.6, 0.3], 40, 4, seed);
        let second = SimConfig::new(PowerSeriesFamily::Poisson, [0.8, 0.2, 1.2], 30, 4, seed.wrapping_add(1));
        let forward = run_grid(&[first, second]).unwrap();
        let backward = run_grid(&[second, first]).unwrap();
        prop_assert_eq!(&forward[0], &backward[1]);
        prop_assert_eq!(&forward[1], &backward[0]);
    }
}
