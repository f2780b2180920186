//! Fading models behind a common trait, looked up by name at run time.

use std::collections::BTreeMap;
use std::fmt;

use crate::capacity::{self, DelayQoS};
use crate::channels::{Density, FisherFParams, KappaMuShadowedParams};
use crate::detection::{self, DetectorConfig, TruncationReport};
use crate::error::{Error, Result};

/// A channel model with closed-form performance metrics.
pub trait FadingModel: Density {
    /// Average detection probability and, for series forms, how the series
    /// was truncated.
    fn avg_detection_report(
        &self,
        cfg: &DetectorConfig,
        tol: f64,
    ) -> Result<(f64, Option<TruncationReport>)>;

    /// Average detection probability at the default series tolerance.
    fn avg_detection(&self, cfg: &DetectorConfig) -> Result<f64> {
        Ok(self.avg_detection_report(cfg, DEFAULT_SERIES_TOL)?.0)
    }

    /// Average area under the ROC curve.
    fn avg_auc(&self, u: u32) -> Result<f64>;

    /// ln E[(1+γ)^{−A}].
    fn eff_rate_inner_ln(&self, q: &DelayQoS) -> Result<f64>;

    /// Effective rate in bits/s/Hz.
    fn eff_rate(&self, q: &DelayQoS) -> Result<f64> {
        capacity::rate_from_ln_inner(self.eff_rate_inner_ln(q)?, q)
    }

    /// The same model at another mean SNR (linear).
    fn with_mean_snr(&self, mean_snr: f64) -> Result<Box<dyn FadingModel>>;

    /// Human-readable parameter summary.
    fn describe(&self) -> String;
}

/// Series tolerance used when the caller does not choose one.
pub const DEFAULT_SERIES_TOL: f64 = 1e-10;

impl FadingModel for KappaMuShadowedParams {
    fn avg_detection_report(
        &self,
        cfg: &DetectorConfig,
        _tol: f64,
    ) -> Result<(f64, Option<TruncationReport>)> {
        Ok((detection::avg_pd_kms(self, cfg)?, None))
    }

    fn avg_auc(&self, u: u32) -> Result<f64> {
        detection::avg_auc_kms(self, u)
    }

    fn eff_rate_inner_ln(&self, q: &DelayQoS) -> Result<f64> {
        capacity::eff_rate_inner_ln_kms(self, q)
    }

    fn with_mean_snr(&self, mean_snr: f64) -> Result<Box<dyn FadingModel>> {
        Ok(Box::new(KappaMuShadowedParams::with_mean_snr(
            self, mean_snr,
        )?))
    }

    fn describe(&self) -> String {
        format!(
            "kms kappa={} mu={} m={} mean_snr={}",
            self.kappa(),
            self.mu(),
            self.m(),
            self.mean_snr()
        )
    }
}

impl FadingModel for FisherFParams {
    fn avg_detection_report(
        &self,
        cfg: &DetectorConfig,
        tol: f64,
    ) -> Result<(f64, Option<TruncationReport>)> {
        let (pd, report) = detection::avg_pd_f(self, cfg, tol)?;
        Ok((pd, Some(report)))
    }

    fn avg_auc(&self, u: u32) -> Result<f64> {
        detection::avg_auc_f(self, u)
    }

    fn eff_rate_inner_ln(&self, q: &DelayQoS) -> Result<f64> {
        capacity::eff_rate_inner_ln_f(self, q)
    }

    fn with_mean_snr(&self, mean_snr: f64) -> Result<Box<dyn FadingModel>> {
        Ok(Box::new(FisherFParams::with_mean_snr(self, mean_snr)?))
    }

    fn describe(&self) -> String {
        format!(
            "fisher m={} m_s={} mean_snr={}",
            self.m(),
            self.m_s(),
            self.mean_snr()
        )
    }
}

/// Loosely typed channel parameters as they arrive from a user.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChannelArgs {
    pub kappa: Option<f64>,
    pub mu: Option<u32>,
    pub m: Option<f64>,
    pub m_s: Option<f64>,
    pub mean_snr: f64,
}

fn required<T>(v: Option<T>, what: &str, channel: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("channel '{channel}' needs {what}")))
}

fn integer(v: f64, what: &str) -> Result<u32> {
    if v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
        Ok(v as u32)
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be a positive integer, got {v}"
        )))
    }
}

fn build_kms(args: &ChannelArgs) -> Result<Box<dyn FadingModel>> {
    let kappa = required(args.kappa, "kappa", "kms")?;
    let mu = required(args.mu, "mu", "kms")?;
    let m = integer(required(args.m, "m", "kms")?, "m")?;
    Ok(Box::new(KappaMuShadowedParams::new(
        kappa,
        mu,
        m,
        args.mean_snr,
    )?))
}

fn build_fisher(args: &ChannelArgs) -> Result<Box<dyn FadingModel>> {
    let m = required(args.m, "m", "fisher")?;
    let m_s = required(args.m_s, "m_s", "fisher")?;
    Ok(Box::new(FisherFParams::new(m, m_s, args.mean_snr)?))
}

/// Builds a model from user parameters.
pub type ModelBuilder = fn(&ChannelArgs) -> Result<Box<dyn FadingModel>>;

/// Name → builder table of fading models.
#[derive(Clone, Default)]
pub struct ModelRegistry {
    builders: BTreeMap<String, ModelBuilder>,
}

impl fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.builders.keys()).finish()
    }
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the κ-μ shadowed ("kms") and Fisher-F ("fisher") models.
    pub fn with_builtin() -> Self {
        let mut r = Self::new();
        r.register("kms", build_kms);
        r.register("fisher", build_fisher);
        r
    }

    /// Adds or replaces a model.
    pub fn register(&mut self, name: &str, builder: ModelBuilder) {
        self.builders.insert(name.to_owned(), builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, args: &ChannelArgs) -> Result<Box<dyn FadingModel>> {
        let builder = self.builders.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.names().collect();
            Error::InvalidParameter(format!(
                "unknown channel '{name}' (known: {})",
                known.join(", ")
            ))
        })?;
        builder(args)
    }
}
