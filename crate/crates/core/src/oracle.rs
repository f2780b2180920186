//! Reference values for the closed forms: adaptive quadrature of the defining
//! averages and seeded Monte Carlo simulation.
//!
//! Nothing here calls the closed-form averages in `detection` or `capacity`.
//! The integrands are the instantaneous metrics and the channel densities.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::capacity::DelayQoS;
use crate::channels::Density;
use crate::detection::{self, DetectorConfig};
use crate::error::{Error, Result};
use crate::integrate::{try_integrate, QuadOptions};
use crate::registry::{FadingModel, DEFAULT_SERIES_TOL};

/// Settings for [`quad_average`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    /// Finite upper limit L with P(γ > L) < abs_tol/10, from the density's
    /// tail bound.
    pub fn upper_cutoff(&self, density: &dyn Density) -> Result<f64> {
        let target = self.abs_tol / 10.0;
        let mut l = density.scale().max(f64::MIN_POSITIVE);
        for _ in 0..2000 {
            if density.tail_bound(l) < target {
                return Ok(l);
            }
            l *= 2.0;
        }
        Err(Error::Convergence {
            func: "upper_cutoff",
            terms: 2000,
        })
    }
}

/// Result of [`quad_average`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Quadrature error estimate on [0, L].
    pub abs_err: f64,
    pub cutoff: f64,
    /// Bound on the density mass beyond the cutoff.
    pub tail_mass: f64,
}

/// ∫₀^L metric(γ) pdf(γ) dγ with L from [`QuadratureSpec::upper_cutoff`].
///
/// Breakpoints are placed geometrically from 10⁻⁶ of the density scale up to
/// L. When the density is unbounded at the origin (pdf ~ γ^{p−1}, p < 1) the
/// first panel is integrated in s = γ^p, which removes the singularity.
pub fn quad_average<M>(
    metric: M,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> Result<QuadResult>
where
    M: Fn(f64) -> Result<f64>,
{
    let cutoff = spec.upper_cutoff(density)?;
    let opts = QuadOptions {
        abs_tol: spec.abs_tol,
        rel_tol: spec.rel_tol,
        max_subdivisions: spec.max_subdivisions,
    };
    let first = (density.scale() * 1e-6).min(cutoff / 4.0);
    let mut points = vec![first];
    while let Some(&last) = points.last() {
        let next = last * 4.0;
        if next >= cutoff {
            break;
        }
        points.push(next);
    }
    points.push(cutoff);

    let p = density.origin_exponent();
    let head = if p < 1.0 {
        let inv = 1.0 / p;
        try_integrate(
            |s| {
                if s <= 0.0 {
                    return Ok(0.0);
                }
                let g = s.powf(inv);
                // pdf(g) g^{1−p} is bounded at the origin.
                Ok(metric(g)? * density.pdf(g)? * g / s * inv)
            },
            &[0.0, first.powf(p)],
            &opts,
        )?
    } else {
        try_integrate(
            |g| {
                Ok(if g <= 0.0 {
                    0.0
                } else {
                    metric(g)? * density.pdf(g)?
                })
            },
            &[0.0, first],
            &opts,
        )?
    };
    let body = try_integrate(|g| Ok(metric(g)? * density.pdf(g)?), &points, &opts)?;
    Ok(QuadResult {
        value: head.value + body.value,
        abs_err: head.abs_err + body.abs_err,
        cutoff,
        tail_mass: density.tail_bound(cutoff),
    })
}

/// Settings for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloSpec {
    pub seed: u64,
    pub n_samples: usize,
    pub n_streams: usize,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            n_samples: 1_000_000,
            n_streams: 8,
        }
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// SNR variates drawn once and reused for several metrics.
///
/// Stream i uses ChaCha8 seeded from `seed` with stream number i, so the
/// draws depend only on (seed, n_samples, n_streams).
#[derive(Debug, Clone)]
pub struct SampleSet {
    streams: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn draw(density: &dyn Density, spec: &MonteCarloSpec) -> Result<Self> {
        if spec.n_streams == 0 || spec.n_samples < spec.n_streams {
            return Err(Error::InvalidParameter(
                "need at least one stream and one sample per stream".into(),
            ));
        }
        let per = spec.n_samples / spec.n_streams;
        let extra = spec.n_samples % spec.n_streams;
        let streams = (0..spec.n_streams)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(i as u64);
                density.sample(&mut rng, per + usize::from(i < extra))
            })
            .collect();
        Ok(Self { streams })
    }

    pub fn len(&self) -> usize {
        self.streams.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.streams.iter().flatten().copied()
    }

    /// Mean and standard error of `metric` over the samples. Streams are
    /// reduced in index order, so the result does not depend on scheduling.
    pub fn average<M>(&self, metric: M) -> Result<McEstimate>
    where
        M: Fn(f64) -> Result<f64> + Sync,
    {
        let parts: Vec<Welford> = self
            .streams
            .par_iter()
            .map(|s| {
                let mut w = Welford::default();
                for &g in s {
                    w.push(metric(g)?);
                }
                Ok(w)
            })
            .collect::<Result<_>>()?;
        let total = parts.into_iter().fold(Welford::default(), Welford::merge);
        Ok(total.estimate())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let frac = other.n as f64 / n as f64;
        Welford {
            n,
            mean: self.mean + d * frac,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * frac,
        }
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            n: self.n,
        }
    }
}

/// Monte Carlo mean of `metric(γ)` over fresh samples of `density`.
pub fn mc_average<M>(metric: M, density: &dyn Density, spec: &MonteCarloSpec) -> Result<McEstimate>
where
    M: Fn(f64) -> Result<f64> + Sync,
{
    SampleSet::draw(density, spec)?.average(metric)
}

/// The averaged quantity a verification compares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// Average detection probability.
    Detection(DetectorConfig),
    /// Average area under the ROC for time-bandwidth product u.
    Auc(u32),
    /// The inner expectation E[(1+γ)^{−A}] of the effective rate.
    EffRateInner(DelayQoS),
}

impl Metric {
    /// The instantaneous quantity whose channel average is the metric.
    pub fn instantaneous(&self, gamma: f64) -> Result<f64> {
        match self {
            Metric::Detection(cfg) => detection::prob_detect_instant(cfg, gamma),
            Metric::Auc(u) => detection::auc_instant(*u, gamma),
            Metric::EffRateInner(q) => Ok((-q.a_exponent() * gamma.ln_1p()).exp()),
        }
    }

    /// The closed-form channel average of this metric.
    pub fn closed_form(&self, model: &dyn FadingModel, series_tol: f64) -> Result<f64> {
        match self {
            Metric::Detection(cfg) => Ok(model.avg_detection_report(cfg, series_tol)?.0),
            Metric::Auc(u) => model.avg_auc(*u),
            Metric::EffRateInner(q) => Ok(model.eff_rate_inner_ln(q)?.exp()),
        }
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            Metric::Detection(_) => MetricKind::AvgPd,
            Metric::Auc(_) => MetricKind::AvgAuc,
            Metric::EffRateInner(_) => MetricKind::EffRate,
        }
    }
}

/// Metric family without its settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    AvgPd,
    AvgAuc,
    EffRate,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::AvgPd => "avg_pd",
            MetricKind::AvgAuc => "avg_auc",
            MetricKind::EffRate => "eff_rate",
        }
    }
}

/// A metric family tied to a channel name, e.g. `avg_pd_kms`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricId {
    pub kind: MetricKind,
    pub channel: String,
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.kind.as_str(), self.channel)
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        for kind in [MetricKind::AvgPd, MetricKind::AvgAuc, MetricKind::EffRate] {
            if let Some(rest) = s.strip_prefix(kind.as_str()) {
                if let Some(channel) = rest.strip_prefix('_') {
                    if !channel.is_empty() {
                        return Ok(MetricId {
                            kind,
                            channel: channel.to_owned(),
                        });
                    }
                }
            }
        }
        Err(Error::InvalidParameter(format!("unknown metric '{s}'")))
    }
}

/// Acceptance windows for [`verify_closed_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    /// Allowed |closed form − quadrature| on top of the quadrature's own
    /// error estimate and the series tolerance.
    pub quad_abs: f64,
    /// Allowed |closed form − Monte Carlo| in standard errors.
    pub mc_sigmas: f64,
    /// Truncation tolerance handed to series closed forms.
    pub series_tol: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            quad_abs: 1e-7,
            mc_sigmas: 4.0,
            series_tol: DEFAULT_SERIES_TOL,
        }
    }
}

/// Closed form against both oracles for one metric and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord {
    pub metric: MetricId,
    pub model: String,
    pub closed_form: f64,
    pub quad: QuadResult,
    pub mc: McEstimate,
    pub quad_pass: bool,
    pub mc_pass: bool,
}

impl VerificationRecord {
    pub fn passed(&self) -> bool {
        self.quad_pass && self.mc_pass
    }
}

impl fmt::Display for VerificationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] closed={:.10e} quad={:.10e}±{:.1e} mc={:.10e}±{:.1e} {}",
            self.metric,
            self.model,
            self.closed_form,
            self.quad.value,
            self.quad.abs_err,
            self.mc.mean,
            self.mc.std_error,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares `metric.closed_form(model)` against quadrature and Monte Carlo.
///
/// `samples` lets several metrics share one draw; when `None` a fresh set is
/// drawn from `mc`. `perturb` multiplies the closed-form value before the
/// comparison and exists to exercise the failure path (use 1.0 otherwise).
pub fn verify_closed_form(
    metric: &Metric,
    model: &dyn FadingModel,
    quad: &QuadratureSpec,
    mc: &MonteCarloSpec,
    samples: Option<&SampleSet>,
    tol: &VerifyTolerances,
    perturb: f64,
) -> Result<VerificationRecord> {
    let closed_form = metric.closed_form(model, tol.series_tol)? * perturb;
    let q = quad_average(|g| metric.instantaneous(g), model, quad)?;
    let owned;
    let set = match samples {
        Some(s) => s,
        None => {
            owned = SampleSet::draw(model, mc)?;
            &owned
        }
    };
    let m = set.average(|g| metric.instantaneous(g))?;
    let series = if matches!(metric, Metric::Detection(_)) && model.name() == "fisher" {
        tol.series_tol
    } else {
        0.0
    };
    let quad_window = tol.quad_abs + q.abs_err + q.tail_mass + series;
    let quad_pass = (closed_form - q.value).abs() <= quad_window;
    let mc_pass = (closed_form - m.mean).abs() <= tol.mc_sigmas * m.std_error + 1e-12;
    Ok(VerificationRecord {
        metric: MetricId {
            kind: metric.kind(),
            channel: model.name().to_owned(),
        },
        model: model.describe(),
        closed_form,
        quad: q,
        mc: m,
        quad_pass,
        mc_pass,
    })
}
