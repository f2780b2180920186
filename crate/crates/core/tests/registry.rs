use edfading::capacity::DelayQoS;
use edfading::detection::DetectorConfig;
use edfading::registry::{ChannelArgs, FadingModel, ModelRegistry};
use edfading::{FisherFParams, Result};

fn args(kappa: Option<f64>, mu: Option<u32>, m: Option<f64>, m_s: Option<f64>) -> ChannelArgs {
    ChannelArgs {
        kappa,
        mu,
        m,
        m_s,
        mean_snr: 10.0,
    }
}

#[test]
fn builtin_models_round_trip_through_the_trait() {
    let r = ModelRegistry::with_builtin();
    let kms = r
        .build("kms", &args(Some(2.0), Some(3), Some(2.0), None))
        .unwrap();
    let f = r
        .build("fisher", &args(None, None, Some(2.0), Some(3.0)))
        .unwrap();
    let c = DetectorConfig::for_pf(2, 0.1).unwrap();
    let q = DelayQoS::new(1.0).unwrap();
    for model in [&kms, &f] {
        let pd = model.avg_detection(&c).unwrap();
        assert!(pd > 0.1 && pd < 1.0);
        assert!(model.avg_auc(2).unwrap() > 0.5);
        assert!(model.eff_rate(&q).unwrap() > 0.0);
        let moved = model.with_mean_snr(1.0).unwrap();
        assert_eq!(moved.mean_snr(), 1.0);
        assert_eq!(moved.name(), model.name());
        assert!(moved.avg_detection(&c).unwrap() < pd);
    }
    let (_, report) = f.avg_detection_report(&c, 1e-9).unwrap();
    assert!(report.unwrap().error_bound <= 1e-9);
    assert!(kms.avg_detection_report(&c, 1e-9).unwrap().1.is_none());
    assert!(kms.describe().starts_with("kms "));
}

#[test]
fn missing_or_bad_parameters_are_rejected() {
    let r = ModelRegistry::with_builtin();
    assert!(r
        .build("kms", &args(None, Some(3), Some(2.0), None))
        .is_err());
    assert!(r
        .build("kms", &args(Some(1.0), Some(2), Some(3.0), None))
        .is_err());
    assert!(r
        .build("fisher", &args(None, None, Some(2.0), None))
        .is_err());
    let err = r
        .build("nakagami", &args(None, None, Some(2.0), None))
        .unwrap_err();
    assert!(err.to_string().contains("fisher, kms"), "{err}");
}

fn shadowless(a: &ChannelArgs) -> Result<Box<dyn FadingModel>> {
    Ok(Box::new(FisherFParams::new(
        a.m.unwrap_or(1.0),
        1e4,
        a.mean_snr,
    )?))
}

#[test]
fn models_can_be_registered_at_run_time() {
    let mut r = ModelRegistry::with_builtin();
    r.register("nakagami", shadowless);
    assert_eq!(r.names().collect::<Vec<_>>(), ["fisher", "kms", "nakagami"]);
    let model = r
        .build("nakagami", &args(None, None, Some(2.0), None))
        .unwrap();
    assert_eq!(model.name(), "fisher");
}
