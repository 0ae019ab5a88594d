use std::f64::consts::LN_2;

use cascade_dim::boxdim::{dyadic_cover_count, regression_dimension, CountSeries};
use cascade_dim::cascade::{Cascade, CascadeConfig};
use cascade_dim::sets::{
    enumerate_points, eventually_separates, thyrse_level_count, PointSetSpec, Separation,
};
use cascade_dim::theory::{bounds_table, hausdorff_image_dim, legendre_psi, phi};
use cascade_dim::{DyadicPath, Regime, WeightModel};
use proptest::prelude::*;

fn any_model() -> impl Strategy<Value = WeightModel> {
    prop_oneof![
        (0.01..1.38f64).prop_map(|s| WeightModel::log_normal(s).unwrap()),
        (0.01..0.99f64).prop_map(|x| WeightModel::two_point(x).unwrap()),
    ]
}

fn near_critical_models() -> [WeightModel; 2] {
    [
        WeightModel::log_normal(4f64.ln() - 0.01).unwrap(),
        WeightModel::two_point(0.99).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_is_convex_and_normalized(m in any_model(), t in 0.01..3.99f64) {
        let h = 1e-3;
        let f = |t: f64| m.log2_moment(t).unwrap();
        prop_assert!(f(t + h) - 2.0 * f(t) + f(t - h) >= -1e-9);
        prop_assert!(f(1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_matches_finite_differences(m in any_model(), t in 0.001..3.999f64) {
        let h = 1e-5;
        let fd = (m.log2_moment(t + h).unwrap() - m.log2_moment(t - h).unwrap()) / (2.0 * h);
        prop_assert!((m.log2_moment_slope(t).unwrap() - fd).abs() < 1e-6);
        prop_assert!((m.log2_moment_slope(0.0).unwrap() + m.gamma()).abs() < 1e-12);
    }

    #[test]
    fn lognormal_regime_boundary(s in 0.01..3.0f64) {
        prop_assume!((s - 4f64.ln()).abs() > 1e-9);
        let r = WeightModel::log_normal(s).unwrap().classify_regime().regime;
        prop_assert_eq!(r == Regime::Subcritical, s < 4f64.ln());
    }

    #[test]
    fn sandwich_holds(m in any_model(), p in 0.05..5.0f64) {
        let row = bounds_table(&m, &[p]).unwrap()[0];
        prop_assert!(row.s1 + 1e-9 < row.dim && row.dim + 1e-9 < row.s2, "{:?}", row);
    }

    #[test]
    fn cascade_masses_positive_additive_order_free(seed in any::<u64>(), two_point in any::<bool>()) {
        let m = if two_point { WeightModel::two_point(0.7).unwrap() } else { WeightModel::log_normal(LN_2).unwrap() };
        let c = Cascade::new(CascadeConfig::new(m, seed, 8)).unwrap();
        let paths: Vec<DyadicPath> = (0..8).flat_map(|l| (0..1u64 << l).map(move |i| DyadicPath::new(i, l).unwrap())).collect();
        let forward: Vec<f64> = paths.iter().map(|&p| c.interval_mass(p).unwrap().mass).collect();
        let backward: Vec<f64> = paths.iter().rev().map(|&p| c.interval_mass(p).unwrap().mass).collect();
        prop_assert!(forward.iter().eq(backward.iter().rev()));
        for (&p, &mass) in paths.iter().zip(&forward) {
            prop_assert!(mass > 0.0);
            let kids = c.interval_mass(p.child(0)).unwrap().mass + c.interval_mass(p.child(1)).unwrap().mass;
            prop_assert_eq!(mass, kids);
        }
    }

    #[test]
    fn cover_count_monotone(mut pts in prop::collection::vec(0.0..=1.0f64, 1..200), extra in prop::collection::vec(0.0..=1.0f64, 0..50), n in 0u32..20) {
        pts.sort_by(f64::total_cmp);
        let mut sup = pts.iter().chain(&extra).copied().collect::<Vec<_>>();
        sup.sort_by(f64::total_cmp);
        let small = dyadic_cover_count(&pts, n).unwrap();
        prop_assert!(small <= dyadic_cover_count(&sup, n).unwrap());
        prop_assert!(small <= dyadic_cover_count(&pts, n + 1).unwrap());
    }
}

#[test]
fn regression_is_exact_on_exact_powers() {
    for k in 0..=4u32 {
        for c in [0u32, 3] {
            let series = CountSeries::new((1..=10).map(|j| (4 * j, 1u64 << (k * j + c))).collect());
            let est = regression_dimension(&series, (4, 40)).unwrap();
            assert!((est.slope - f64::from(k) / 4.0).abs() < 1e-12);
        }
    }
}

#[test]
fn lognormal_regime_both_sides() {
    let ln4 = 4f64.ln();
    assert_eq!(
        WeightModel::log_normal(ln4 - 1e-6)
            .unwrap()
            .classify_regime()
            .regime,
        Regime::Subcritical
    );
    assert_ne!(
        WeightModel::log_normal(ln4 + 1e-6)
            .unwrap()
            .classify_regime()
            .regime,
        Regime::Subcritical
    );
}

#[test]
fn psi_nondecreasing_concave_and_signed() {
    for m in near_critical_models()
        .into_iter()
        .chain([WeightModel::log_normal(LN_2).unwrap()])
    {
        let g = m.gamma();
        let xs: Vec<f64> = (0..1000).map(|i| 1.2 * g * f64::from(i) / 999.0).collect();
        let psi: Vec<f64> = xs
            .iter()
            .map(|&x| legendre_psi(&m, x).unwrap().value)
            .collect();
        for w in psi.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{m}");
        }
        for w in psi.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] <= 1e-9, "{m}");
        }
        for (&x, &v) in xs.iter().zip(&psi) {
            if x >= g {
                assert_eq!(v, 0.0);
            } else {
                assert!(v < 0.0, "{m}: ψ({x}) = {v}");
            }
        }
    }
}

#[test]
fn phi_strictly_decreasing() {
    for m in near_critical_models() {
        let vals: Vec<f64> = (0..=100)
            .map(|i| phi(&m, f64::from(i) * 0.1).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{m}");
    }
}

#[test]
fn root_equation_increasing_with_fixed_endpoints() {
    for m in near_critical_models() {
        let s: Vec<f64> = (0..=200)
            .map(|i| hausdorff_image_dim(&m, f64::from(i) / 200.0).unwrap())
            .collect();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(s[0].abs() < 1e-12 && (s[200] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn thyrse_level_counts() {
    for alpha in [0.3, 0.5, 1.0, 1.7] {
        let spec = PointSetSpec::thyrse(alpha, 12).unwrap();
        let pts = enumerate_points(&spec).unwrap();
        for k in 1..=12u32 {
            let lo = (-f64::from(k)).exp2();
            let n = pts.iter().filter(|&&x| x >= lo && x < 2.0 * lo).count() as u64;
            assert_eq!(n, thyrse_level_count(alpha, k));
            assert_eq!(n, 1u64 << (alpha * f64::from(k)).floor() as u32);
        }
    }
}

#[test]
fn enumerations_are_sorted_and_contain_zero() {
    for spec in [
        PointSetSpec::power_sequence(0.5, 5000).unwrap(),
        PointSetSpec::thyrse(1.0, 10).unwrap(),
        PointSetSpec::cantor(0.25, 8).unwrap(),
    ] {
        let pts = enumerate_points(&spec).unwrap();
        assert!(pts.windows(2).all(|w| w[0] < w[1]), "{spec}");
        assert!(pts.iter().all(|x| (0.0..=1.0).contains(x)));
        assert_eq!(pts[0], 0.0);
    }
}

#[test]
fn pure_powers_separate() {
    let powers = |p: f64| {
        (1..=20_000)
            .map(|n| f64::from(n).powf(-p))
            .collect::<Vec<_>>()
    };
    for p in [0.5, 1.0, 2.0] {
        for q in [0.25, 0.5, 1.0] {
            if q < p {
                assert_eq!(
                    eventually_separates(&powers(p), &powers(q), 1),
                    Separation::True,
                    "p={p} q={q}"
                );
            }
        }
    }
}
