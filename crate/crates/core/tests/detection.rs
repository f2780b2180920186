use edfading::detection::*;
use edfading::oracle::{quad_average, QuadratureSpec};
use edfading::registry::FadingModel;
use edfading::{FisherFParams, KappaMuShadowedParams};
use proptest::prelude::*;

// Reference values frozen from an independent 30-digit evaluation (Marcum Q
// as a Poisson mixture of incomplete gammas, densities integrated directly).
const THRESHOLD_U2_PF_HALF: f64 = 3.356_693_980_033_321;
const PD_INSTANT_U2_G3_L4: f64 = 0.875_026_863_597_736_7;
const AVG_PD_KMS_2_3_2_10_PF_01: f64 = 0.885_838_071_395_197_2;
const AVG_PD_F_2_3_1_PF_01: f64 = 0.325_302_891_783_316_23;
const AUC_INSTANT_U2_G5: f64 = 0.933_305_938_618_082_2;
const AVG_AUC_KMS_2_2_1_5: f64 = 0.857_780_159_285_817_2;
const AVG_AUC_F_2_3_5: f64 = 0.882_290_516_495_036_3;

fn cfg(u: u32, lambda: f64) -> DetectorConfig {
    DetectorConfig::new(u, lambda).unwrap()
}

#[test]
fn false_alarm_examples() {
    assert_eq!(prob_false_alarm(&cfg(3, 0.0)), 1.0);
    assert!((prob_false_alarm(&cfg(1, 2.0)) - (-1.0f64).exp()).abs() < 1e-15);
    assert!((prob_false_alarm(&cfg(2, 5.0)) - 3.5 * (-2.5f64).exp()).abs() < 1e-15);
    assert!(DetectorConfig::new(0, 1.0).is_err());
    assert!(DetectorConfig::new(1, -1.0).is_err());
}

#[test]
fn threshold_examples() {
    assert!((threshold_for_pf(1, (-1.0f64).exp()).unwrap() - 2.0).abs() < 1e-11);
    let l = threshold_for_pf(2, 0.5).unwrap();
    assert!((l - THRESHOLD_U2_PF_HALF).abs() < 1e-11, "{l}");
    for u in [1, 2, 5] {
        for pf in [0.01, 0.1, 0.9] {
            let l = threshold_for_pf(u, pf).unwrap();
            assert!((prob_false_alarm(&cfg(u, l)) - pf).abs() <= 1e-12);
        }
    }
    assert!(threshold_for_pf(2, 0.0).is_err());
    assert!(threshold_for_pf(2, 1.0).is_err());
}

#[test]
fn instant_detection_examples() {
    assert_eq!(prob_detect_instant(&cfg(2, 0.0), 3.0).unwrap(), 1.0);
    assert!((prob_detect_instant(&cfg(1, 2.0), 0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    let v = prob_detect_instant(&cfg(2, 4.0), 3.0).unwrap();
    assert!((v - PD_INSTANT_U2_G3_L4).abs() < 1e-13, "{v}");
}

#[test]
fn averaged_detection_examples() {
    let kms = KappaMuShadowedParams::new(2.0, 3, 2, 10.0).unwrap();
    let c = DetectorConfig::for_pf(2, 0.1).unwrap();
    let v = avg_pd_kms(&kms, &c).unwrap();
    assert!((v - AVG_PD_KMS_2_3_2_10_PF_01).abs() < 1e-9, "{v}");
    assert_eq!(avg_pd_kms(&kms, &cfg(2, 0.0)).unwrap(), 1.0);

    let fisher = FisherFParams::new(2.0, 3.0, 1.0).unwrap();
    let (v, report) = avg_pd_f(&fisher, &c, 1e-10).unwrap();
    assert!((v - AVG_PD_F_2_3_1_PF_01).abs() < 1e-9, "{v}");
    assert!(report.converged && report.error_bound <= 1e-10);
    let (one, _) = avg_pd_f(&fisher, &cfg(2, 0.0), 1e-10).unwrap();
    assert_eq!(one, 1.0);
}

#[test]
fn exponential_channel_matches_quadrature() {
    let p = KappaMuShadowedParams::new(0.0, 1, 1, 4.0).unwrap();
    let c = DetectorConfig::for_pf(3, 0.05).unwrap();
    let q = quad_average(
        |g| prob_detect_instant(&c, g),
        &p,
        &QuadratureSpec::default(),
    )
    .unwrap();
    assert!((avg_pd_kms(&p, &c).unwrap() - q.value).abs() < 1e-9);
}

#[test]
fn truncation_tolerances_are_consistent() {
    let p = FisherFParams::new(2.0, 3.0, 1.0).unwrap();
    let c = DetectorConfig::for_pf(2, 0.1).unwrap();
    let (a, ra) = avg_pd_f(&p, &c, 1e-7).unwrap();
    let (b, rb) = avg_pd_f(&p, &c, 1e-10).unwrap();
    assert!((a - b).abs() <= 1e-7);
    assert!(rb.terms_used >= ra.terms_used);
    assert!(avg_pd_f(&p, &c, 0.0).is_err());
}

#[test]
fn truncation_bound_dominates_tail() {
    let p = FisherFParams::new(2.0, 3.0, 10.0).unwrap();
    let c = cfg(2, 4.0);
    let bound = truncation_bound_f(&p, &c, 20).unwrap();
    let tail: f64 = detection_series_terms(&p, &c, 20..5001)
        .unwrap()
        .iter()
        .sum();
    assert!(bound >= tail, "{bound} < {tail}");
    let points = [
        FisherFParams::new(2.0, 3.0, 10.0).unwrap(),
        FisherFParams::new(0.8, 1.2, 1.0).unwrap(),
        FisherFParams::new(2.5, 10.0, 0.2).unwrap(),
        FisherFParams::new(1.0, 3.0, 100.0).unwrap(),
        FisherFParams::new(4.0, 2.0, 3.0).unwrap(),
    ];
    for p in &points {
        for s in [1, 5, 20, 60] {
            let b0 = truncation_bound_f(p, &c, s).unwrap();
            let b1 = truncation_bound_f(p, &c, s + 10).unwrap();
            assert!(b0 >= 0.0 && b1 <= b0, "{p:?} S={s}: {b1} > {b0}");
        }
    }
}

#[test]
fn auc_examples() {
    assert!((auc_instant(1, 0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((auc_instant(4, 2000.0).unwrap() - 1.0).abs() < 1e-15);
    let v = auc_instant(2, 5.0).unwrap();
    assert!((v - AUC_INSTANT_U2_G5).abs() < 1e-14, "{v}");

    // u = 1 collapses to the MGF at −½.
    let p = KappaMuShadowedParams::new(2.0, 3, 1, 5.0).unwrap();
    let want = 1.0 - 0.5 * p.mgf(-0.5).unwrap();
    assert!((avg_auc_kms(&p, 1).unwrap() - want).abs() < 1e-14);

    let p = KappaMuShadowedParams::new(2.0, 2, 1, 5.0).unwrap();
    let v = avg_auc_kms(&p, 2).unwrap();
    assert!((v - AVG_AUC_KMS_2_2_1_5).abs() < 1e-10, "{v}");
    let f = FisherFParams::new(2.0, 3.0, 5.0).unwrap();
    let v = avg_auc_f(&f, 2).unwrap();
    assert!((v - AVG_AUC_F_2_3_5).abs() < 1e-10, "{v}");
}

#[test]
fn auc_limits_in_mean_snr() {
    let p = KappaMuShadowedParams::new(2.0, 2, 1, 1e-8).unwrap();
    assert!((avg_auc_kms(&p, 3).unwrap() - auc_instant(3, 0.0).unwrap()).abs() < 1e-7);
    let p = KappaMuShadowedParams::new(2.0, 2, 1, 1e8).unwrap();
    assert!(avg_auc_kms(&p, 3).unwrap() > 1.0 - 1e-6);
    let f = FisherFParams::new(2.0, 3.0, 1e8).unwrap();
    assert!(avg_auc_f(&f, 2).unwrap() > 1.0 - 1e-6);
}

#[test]
fn croc_curve_shape() {
    let p = KappaMuShadowedParams::new(2.0, 3, 2, 10.0).unwrap();
    let grid: Vec<f64> = (0..50)
        .map(|i| 1e-3 * 999f64.powf(f64::from(i) / 49.0))
        .collect();
    let curve = croc_curve(&p, 2, &grid, 1e-10).unwrap();
    assert_eq!(curve.len(), 50);
    for w in curve.windows(2) {
        assert!(w[1].pmd() <= w[0].pmd() + 1e-12);
    }
    assert!(curve[49].pmd() < 1e-3);
    let single = croc_curve(&p, 2, &[0.5], 1e-10).unwrap();
    assert_eq!(single.len(), 1);
    assert!(croc_curve(&p, 2, &[0.5, 0.1], 1e-10).is_err());
    assert!(croc_curve(&p, 2, &[0.0], 1e-10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn averages_stay_in_range(
        kappa in 0.0f64..10.0,
        mu in 1u32..5,
        m_frac in 0.0f64..1.0,
        snr_db in -10.0f64..25.0,
        u in 1u32..5,
        pf in 0.001f64..0.999,
    ) {
        let m = 1 + (f64::from(mu - 1) * m_frac).round() as u32;
        let p = KappaMuShadowedParams::new(kappa, mu, m, edfading::db_to_linear(snr_db)).unwrap();
        let c = DetectorConfig::for_pf(u, pf).unwrap();
        let pd = avg_pd_kms(&p, &c).unwrap();
        prop_assert!(pd >= pf - 1e-9 && pd <= 1.0);
        let a = avg_auc_kms(&p, u).unwrap();
        prop_assert!((0.5 - 1e-12..=1.0).contains(&a));
    }

    #[test]
    fn fisher_averages_stay_in_range(
        m in 0.5f64..5.0,
        ms in 1.1f64..20.0,
        snr_db in -10.0f64..25.0,
        u in 1u32..5,
        pf in 0.001f64..0.999,
    ) {
        let p = FisherFParams::new(m, ms, edfading::db_to_linear(snr_db)).unwrap();
        let c = DetectorConfig::for_pf(u, pf).unwrap();
        let (pd, report) = avg_pd_f(&p, &c, 1e-9).unwrap();
        prop_assert!(pd >= pf - 1e-8 && pd <= 1.0);
        prop_assert!(report.converged && report.error_bound <= 1e-9);
        let a = avg_auc_f(&p, u).unwrap();
        prop_assert!((0.5 - 1e-12..=1.0).contains(&a));
    }

    #[test]
    fn detection_grows_with_mean_snr(
        kappa in 0.0f64..8.0,
        snr_db in -10.0f64..20.0,
        pf in 0.01f64..0.9,
    ) {
        let c = DetectorConfig::for_pf(2, pf).unwrap();
        let lo = KappaMuShadowedParams::new(kappa, 3, 2, edfading::db_to_linear(snr_db)).unwrap();
        let hi = KappaMuShadowedParams::new(kappa, 3, 2, edfading::db_to_linear(snr_db + 1.0)).unwrap();
        prop_assert!(avg_pd_kms(&hi, &c).unwrap() >= avg_pd_kms(&lo, &c).unwrap() - 1e-12);
        prop_assert!(hi.avg_auc(2).unwrap() >= lo.avg_auc(2).unwrap() - 1e-12);
    }

    #[test]
    fn instant_detection_is_monotone(u in 1u32..6, lambda in 0.0f64..40.0, g in 0.0f64..50.0, dg in 0.0f64..5.0) {
        let c = cfg(u, lambda);
        let a = prob_detect_instant(&c, g).unwrap();
        let b = prob_detect_instant(&c, g + dg).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-13);
        let (x, y) = (auc_instant(u, g).unwrap(), auc_instant(u, g + dg).unwrap());
        prop_assert!((0.5..=1.0).contains(&x));
        prop_assert!(y >= x - 1e-14);
    }
}
