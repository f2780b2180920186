//! Energy-detector performance over fading channels.
//!
//! Under H1 the normalized energy statistic is noncentral chi-square with 2u
//! degrees of freedom and noncentrality 2γ, so P_d(γ) = Q_u(√(2γ), √λ) and
//! P_f = Γ(u, λ/2)/Γ(u).

use rayon::prelude::*;

use crate::channels::{FisherFParams, KappaMuShadowedParams, Route};
use crate::error::{domain, Error, Result};
use crate::registry::FadingModel;
use crate::specfun::{
    binomial, kummer_1f1, ln_beta, ln_gamma, ln_scaled_u_integral, marcum_pq, regularized_gamma_pq,
    AccuracyPolicy,
};

/// Energy detector with time-bandwidth product `u` and threshold `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    u: u32,
    lambda: f64,
}

impl DetectorConfig {
    pub fn new(u: u32, lambda: f64) -> Result<Self> {
        if u == 0 {
            return Err(Error::InvalidParameter("u must be at least 1".into()));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self { u, lambda })
    }

    /// Detector whose threshold gives false-alarm probability `pf`.
    pub fn for_pf(u: u32, pf: f64) -> Result<Self> {
        Self::new(u, threshold_for_pf(u, pf)?)
    }

    pub fn u(&self) -> u32 {
        self.u
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Series truncation summary for the Fisher-F detection series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub terms_used: usize,
    pub error_bound: f64,
    pub converged: bool,
}

/// A point of a receiver operating characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub pf: f64,
    pub pd: f64,
}

impl RocPoint {
    /// Missed-detection probability 1 − P_d.
    pub fn pmd(&self) -> f64 {
        1.0 - self.pd
    }
}

/// P_f(λ) = Γ(u, λ/2)/Γ(u).
pub fn prob_false_alarm(cfg: &DetectorConfig) -> f64 {
    regularized_gamma_pq(f64::from(cfg.u), 0.5 * cfg.lambda)
        .map(|(_, q)| q)
        .expect("validated detector")
}

/// Threshold λ with P_f(λ) = `pf`, by bracketed bisection.
pub fn threshold_for_pf(u: u32, pf: f64) -> Result<f64> {
    if u == 0 {
        return Err(Error::InvalidParameter("u must be at least 1".into()));
    }
    if !(pf > 0.0 && pf < 1.0) {
        return Err(domain(
            "threshold_for_pf",
            format!("need 0 < pf < 1, got {pf}"),
        ));
    }
    let uf = f64::from(u);
    let q = |lambda: f64| regularized_gamma_pq(uf, 0.5 * lambda).map(|(_, q)| q);
    let mut lo = 0.0;
    let mut hi = 2.0 * uf;
    while q(hi)? > pf {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Convergence {
                func: "threshold_for_pf",
                terms: 0,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q(mid)? > pf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if (q(lo)? - pf).abs() <= (q(hi)? - pf).abs() {
        lo
    } else {
        hi
    })
}

/// Instantaneous detection probability Q_u(√(2γ), √λ).
pub fn prob_detect_instant(cfg: &DetectorConfig, gamma: f64) -> Result<f64> {
    Ok(detect_pair(cfg, gamma)?.1)
}

/// (1 − P_d(γ), P_d(γ)), each accurate in relative terms.
pub(crate) fn detect_pair(cfg: &DetectorConfig, gamma: f64) -> Result<(f64, f64)> {
    if !(gamma >= 0.0) {
        return Err(domain(
            "prob_detect_instant",
            format!("gamma must be >= 0, got {gamma}"),
        ));
    }
    marcum_pq(
        cfg.u,
        (2.0 * gamma).sqrt(),
        cfg.lambda.sqrt(),
        &AccuracyPolicy::default(),
    )
}

/// Partial sums Σ_{j<n} B_θ(j) of the Gamma-kernel detection integral
///
/// ∫₀^∞ γ^{n−1} e^{−θγ} Q_u(√(2γ), √λ) dγ = Γ(n)/θ^n [P_f + Σ_{j<n} B_θ(j)],
/// B_θ(j) = λ^u e^{−λ/2} θ^j / (2^u u! (1+θ)^{j+1}) ₁F₁(j+1; u+1; λ/(2(1+θ))).
struct GammaDetectionKernel {
    cfg: DetectorConfig,
    pf: f64,
    theta: f64,
    partial: Vec<f64>,
}

impl GammaDetectionKernel {
    fn new(cfg: DetectorConfig, theta: f64) -> Self {
        Self {
            cfg,
            pf: prob_false_alarm(&cfg),
            theta,
            partial: vec![0.0],
        }
    }

    /// E[Q_u(√(2X), √λ)] for X ~ Gamma(n, rate θ).
    fn average(&mut self, n: u32) -> Result<f64> {
        let uf = f64::from(self.cfg.u);
        let lambda = self.cfg.lambda;
        let x = lambda / (2.0 * (1.0 + self.theta));
        let ln_front = uf * (0.5 * lambda).ln() - 0.5 * lambda - ln_gamma(uf + 1.0)?;
        let policy = AccuracyPolicy::default();
        while self.partial.len() <= n as usize {
            let j = (self.partial.len() - 1) as f64;
            let ln_b = ln_front + j * self.theta.ln() - (j + 1.0) * self.theta.ln_1p();
            let b = ln_b.exp() * kummer_1f1(j + 1.0, uf + 1.0, x, &policy)?;
            let last = *self.partial.last().expect("nonempty");
            self.partial.push(last + b);
        }
        Ok((self.pf + self.partial[n as usize]).min(1.0))
    }
}

/// Average detection probability over κ-μ shadowed fading.
pub fn avg_pd_kms(p: &KappaMuShadowedParams, cfg: &DetectorConfig) -> Result<f64> {
    avg_pd_kms_route(p, cfg, Route::Auto)
}

pub(crate) fn avg_pd_kms_route(
    p: &KappaMuShadowedParams,
    cfg: &DetectorConfig,
    route: Route,
) -> Result<f64> {
    if cfg.lambda == 0.0 {
        return Ok(1.0);
    }
    let mut k1 = GammaDetectionKernel::new(*cfg, p.theta1());
    let mut k2 = GammaDetectionKernel::new(*cfg, p.theta2());
    let ln = p.average_ln(
        |n, theta| {
            let k = if theta == k1.theta { &mut k1 } else { &mut k2 };
            Ok(k.average(n)?.ln())
        },
        route,
        &AccuracyPolicy::default(),
    )?;
    Ok(ln.exp().clamp(0.0, 1.0))
}

/// Margin added to series remainders for rounding and quadrature error in
/// the individual weights.
const WEIGHT_MARGIN: f64 = 1e-11 + 1e4 * f64::EPSILON;

/// Mixed-Poisson weights p_j = E[e^{−γ} γ^j / j!] of the F channel,
/// p_j = Γ(j+m)/(B(m, m_s) j! Ω^j) U(j+m; j−m_s+1; 1/Ω). They sum to one.
pub(crate) struct FisherPoissonWeights {
    p: FisherFParams,
    ln_b: f64,
    policy: AccuracyPolicy,
    next: usize,
    cumulative: f64,
}

impl FisherPoissonWeights {
    pub(crate) fn new(p: &FisherFParams) -> Result<Self> {
        Ok(Self {
            p: *p,
            ln_b: ln_beta(p.m(), p.m_s())?,
            policy: AccuracyPolicy::default(),
            next: 0,
            cumulative: 0.0,
        })
    }

    /// The next weight p_j and the remainder 1 − Σ_{i≤j} p_i.
    pub(crate) fn next_weight(&mut self) -> Result<(f64, f64)> {
        let j = self.next as f64;
        let (m, ms, omega) = (self.p.m(), self.p.m_s(), self.p.omega());
        let ln_u = ln_scaled_u_integral(j + m, j - ms + 1.0, 1.0 / omega, &self.policy)?;
        let ln_pj = ln_gamma(j + m)? - ln_gamma(j + 1.0)? - self.ln_b + m * omega.ln() + ln_u;
        let pj = ln_pj.exp();
        self.cumulative += pj;
        self.next += 1;
        Ok((pj, (1.0 - self.cumulative).max(0.0)))
    }
}

/// Hard cap on the number of Fisher-F series terms.
pub const MAX_SERIES_TERMS: usize = 10_000;

/// Average detection probability over Fisher-F fading.
///
/// P̄_d = Σ_j Q(j+u, λ/2) p_j with the mixed-Poisson weights p_j. The sum is
/// evaluated through its complement 1 − Σ_j P(j+u, λ/2) p_j, whose remainder
/// after S terms is at most P(S+u, λ/2)·(1 − Σ_{j<S} p_j). S is the first
/// index at which that bound is ≤ `tol`.
pub fn avg_pd_f(
    p: &FisherFParams,
    cfg: &DetectorConfig,
    tol: f64,
) -> Result<(f64, TruncationReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if cfg.lambda == 0.0 {
        let report = TruncationReport {
            terms_used: 0,
            error_bound: 0.0,
            converged: true,
        };
        return Ok((1.0, report));
    }
    let uf = f64::from(cfg.u);
    let x = 0.5 * cfg.lambda;
    let mut weights = FisherPoissonWeights::new(p)?;
    let mut miss = 0.0;
    for s in 0..MAX_SERIES_TERMS {
        let (pj, remainder) = weights.next_weight()?;
        let (lower, _) = regularized_gamma_pq(uf + s as f64, x)?;
        miss += lower * pj;
        let (next_lower, _) = regularized_gamma_pq(uf + s as f64 + 1.0, x)?;
        let bound = next_lower * (remainder + WEIGHT_MARGIN);
        if bound <= tol {
            let report = TruncationReport {
                terms_used: s + 1,
                error_bound: bound,
                converged: true,
            };
            return Ok(((1.0 - miss).clamp(0.0, 1.0), report));
        }
    }
    Err(Error::Convergence {
        func: "avg_pd_f",
        terms: MAX_SERIES_TERMS,
    })
}

/// Certified bound on the tail Σ_{j≥S} of the plain detection series
/// Σ_j Q(j+u, λ/2) p_j, namely 1 − Σ_{j<S} p_j plus a rounding margin.
pub fn truncation_bound_f(p: &FisherFParams, _cfg: &DetectorConfig, s: usize) -> Result<f64> {
    if s == 0 {
        return Ok(1.0);
    }
    let mut weights = FisherPoissonWeights::new(p)?;
    let mut remainder = 1.0;
    for _ in 0..s {
        remainder = weights.next_weight()?.1;
    }
    Ok(remainder + WEIGHT_MARGIN)
}

/// Terms j in `range` of the plain detection series, Q(j+u, λ/2) p_j.
pub fn detection_series_terms(
    p: &FisherFParams,
    cfg: &DetectorConfig,
    range: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    let uf = f64::from(cfg.u);
    let mut weights = FisherPoissonWeights::new(p)?;
    let mut out = Vec::with_capacity(range.len());
    for j in 0..range.end {
        let (pj, _) = weights.next_weight()?;
        if j >= range.start {
            let (_, upper) = regularized_gamma_pq(uf + j as f64, 0.5 * cfg.lambda)?;
            out.push(upper * pj);
        }
    }
    Ok(out)
}

/// Coefficients C(l+u−1, l−i) (1/2)^{l+i+u} / i! of the AUC double sum,
/// collected by power i.
fn auc_coefficients(u: u32) -> Result<Vec<f64>> {
    let mut c = vec![0.0; u as usize];
    for l in 0..u {
        for i in 0..=l {
            let b = binomial(u64::from(l + u - 1), u64::from(l - i))? as f64;
            c[i as usize] +=
                b * 0.5f64.powi((l + i + u) as i32) / ln_gamma(f64::from(i) + 1.0)?.exp();
        }
    }
    Ok(c)
}

/// Area under the ROC of the energy detector at SNR γ,
/// A(γ) = 1 − Σ_{l<u} Σ_{i≤l} C(l+u−1, l−i) (1/2)^{l+i+u} γ^i e^{−γ/2}/i!.
pub fn auc_instant(u: u32, gamma: f64) -> Result<f64> {
    if u == 0 {
        return Err(Error::InvalidParameter("u must be at least 1".into()));
    }
    if !(gamma >= 0.0) {
        return Err(domain(
            "auc_instant",
            format!("gamma must be >= 0, got {gamma}"),
        ));
    }
    let c = auc_coefficients(u)?;
    let e = (-0.5 * gamma).exp();
    let mut pow = 1.0;
    let mut s = 0.0;
    for ci in c {
        s += ci * pow;
        pow *= gamma;
    }
    Ok(1.0 - s * e)
}

/// Average AUC over κ-μ shadowed fading.
pub fn avg_auc_kms(p: &KappaMuShadowedParams, u: u32) -> Result<f64> {
    avg_auc_kms_route(p, u, Route::Auto)
}

pub(crate) fn avg_auc_kms_route(p: &KappaMuShadowedParams, u: u32, route: Route) -> Result<f64> {
    if u == 0 {
        return Err(Error::InvalidParameter("u must be at least 1".into()));
    }
    let c = auc_coefficients(u)?;
    // E[A(X)] for X ~ Gamma(n, θ): 1 − Σ_i c_i (n)_i θ^n/(θ+½)^{n+i}.
    let kernel = |n: u32, theta: f64| -> Result<f64> {
        let nf = f64::from(n);
        let ln_ratio = (theta / (theta + 0.5)).ln();
        let mut s = 0.0;
        let mut ln_poch = 0.0;
        for (i, ci) in c.iter().enumerate() {
            let fi = i as f64;
            if i > 0 {
                ln_poch += (nf + fi - 1.0).ln();
            }
            s += ci * (ln_poch + nf * ln_ratio - fi * (theta + 0.5).ln()).exp();
        }
        Ok((1.0 - s).ln())
    };
    Ok(p.average_ln(kernel, route, &AccuracyPolicy::default())?
        .exp())
}

/// Average AUC over Fisher-F fading, through
/// E[γ^i e^{−γ/2}] = Γ(i+m)/(B(m, m_s) Ω^i) U(i+m; i−m_s+1; 1/(2Ω)).
pub fn avg_auc_f(p: &FisherFParams, u: u32) -> Result<f64> {
    if u == 0 {
        return Err(Error::InvalidParameter("u must be at least 1".into()));
    }
    let c = auc_coefficients(u)?;
    let (m, ms, omega) = (p.m(), p.m_s(), p.omega());
    let policy = AccuracyPolicy::default();
    let ln_b = ln_beta(m, ms)?;
    let mut s = 0.0;
    for (i, ci) in c.iter().enumerate() {
        let fi = i as f64;
        let ln_u = ln_scaled_u_integral(fi + m, fi - ms + 1.0, 0.5 / omega, &policy)?;
        let ln_moment = ln_gamma(fi + m)? - ln_b + (fi + m) * 2f64.ln() + m * omega.ln() + ln_u;
        s += ci * ln_moment.exp();
    }
    Ok(1.0 - s)
}

/// Complementary ROC points (P_f, P̄_d) for each false-alarm target, in
/// grid order.
pub fn croc_curve(
    model: &dyn FadingModel,
    u: u32,
    pf_grid: &[f64],
    series_tol: f64,
) -> Result<Vec<RocPoint>> {
    if pf_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "pf grid must be strictly increasing".into(),
        ));
    }
    pf_grid
        .par_iter()
        .map(|&pf| {
            let cfg = DetectorConfig::for_pf(u, pf)?;
            Ok(RocPoint {
                pf,
                pd: model.avg_detection_report(&cfg, series_tol)?.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn false_alarm_examples() {
        let cfg = DetectorConfig::new(1, 2.0).unwrap();
        assert!((prob_false_alarm(&cfg) - (-1f64).exp()).abs() < 1e-15);
        let cfg = DetectorConfig::new(2, 5.0).unwrap();
        assert!((prob_false_alarm(&cfg) - 3.5 * (-2.5f64).exp()).abs() < 1e-15);
        assert_eq!(prob_false_alarm(&DetectorConfig::new(3, 0.0).unwrap()), 1.0);
    }

    #[test]
    fn threshold_round_trip() {
        assert!((threshold_for_pf(1, (-1f64).exp()).unwrap() - 2.0).abs() < 1e-12);
        for u in [1, 2, 4] {
            for pf in [0.001, 0.01, 0.1, 0.5, 0.9, 0.999] {
                let cfg = DetectorConfig::for_pf(u, pf).unwrap();
                assert!((prob_false_alarm(&cfg) - pf).abs() <= 1e-12);
            }
        }
        assert!(threshold_for_pf(2, 0.0).is_err());
        assert!(threshold_for_pf(2, 1.0).is_err());
    }

    #[test]
    fn instant_detection_examples() {
        let cfg = DetectorConfig::new(1, 2.0).unwrap();
        assert!((prob_detect_instant(&cfg, 0.0).unwrap() - (-1f64).exp()).abs() < 1e-14);
        let cfg = DetectorConfig::new(2, 0.0).unwrap();
        assert_eq!(prob_detect_instant(&cfg, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn auc_instant_limits() {
        assert!((auc_instant(1, 0.0).unwrap() - 0.5).abs() < 1e-16);
        for u in 1..6 {
            assert!(
                (auc_instant(u, 0.0).unwrap() - 0.5).abs() < 1e-14,
                "u = {u}"
            );
            assert!((auc_instant(u, 2000.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_kernel_is_a_probability() {
        let cfg = DetectorConfig::new(2, 4.0).unwrap();
        let mut k = GammaDetectionKernel::new(cfg, 0.3);
        let mut prev = 0.0;
        for n in 1..60 {
            let v = k.average(n).unwrap();
            assert!(v >= prev && v <= 1.0);
            prev = v;
        }
    }

    #[test]
    fn kms_routes_agree() {
        let p = KappaMuShadowedParams::new(5.0, 4, 2, 3.0).unwrap();
        let cfg = DetectorConfig::for_pf(2, 0.1).unwrap();
        let a = avg_pd_kms_route(&p, &cfg, Route::Finite).unwrap();
        let b = avg_pd_kms_route(&p, &cfg, Route::Series).unwrap();
        assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        let a = avg_auc_kms_route(&p, 3, Route::Finite).unwrap();
        let b = avg_auc_kms_route(&p, 3, Route::Series).unwrap();
        assert!((a - b).abs() < 1e-11, "{a} vs {b}");
    }
}
