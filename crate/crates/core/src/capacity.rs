//! Effective rate under a statistical delay constraint,
//! R = −(1/A) log₂ E[(1+γ)^{−A}].

use std::f64::consts::LN_2;

use crate::channels::{FisherFParams, KappaMuShadowedParams, Route};
use crate::error::{domain, Error, Result};
use crate::specfun::{gauss_2f1, ln_beta, ln_scaled_u_integral, AccuracyPolicy};

/// Delay-QoS exponent A = ΘTB/ln 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayQoS {
    a_exponent: f64,
}

impl DelayQoS {
    pub fn new(a_exponent: f64) -> Result<Self> {
        if !(a_exponent > 0.0 && a_exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delay exponent A must be positive, got {a_exponent}"
            )));
        }
        Ok(Self { a_exponent })
    }

    /// From the delay exponent Θ, block duration T and bandwidth B.
    pub fn from_physical(theta: f64, block_time: f64, bandwidth: f64) -> Result<Self> {
        Self::new(theta * block_time * bandwidth / LN_2)
    }

    pub fn a_exponent(&self) -> f64 {
        self.a_exponent
    }
}

/// R in bits/s/Hz from ln E[(1+γ)^{−A}].
pub fn rate_from_ln_inner(ln_inner: f64, q: &DelayQoS) -> Result<f64> {
    if !(ln_inner <= 1e-12) || ln_inner.is_nan() {
        return Err(domain(
            "effective rate",
            format!("inner expectation must lie in (0, 1], got exp({ln_inner})"),
        ));
    }
    Ok((-ln_inner / (q.a_exponent * LN_2)).max(0.0))
}

/// ln E[(1+γ)^{−A}] over κ-μ shadowed fading. For X ~ Gamma(n, θ) the
/// kernel is E[(1+X)^{−A}] = θ^n U(n; n−A+1; θ).
pub fn eff_rate_inner_ln_kms(p: &KappaMuShadowedParams, q: &DelayQoS) -> Result<f64> {
    eff_rate_inner_ln_kms_route(p, q, Route::Auto)
}

pub(crate) fn eff_rate_inner_ln_kms_route(
    p: &KappaMuShadowedParams,
    q: &DelayQoS,
    route: Route,
) -> Result<f64> {
    let a = q.a_exponent;
    let policy = AccuracyPolicy::default();
    p.average_ln(
        |n, theta| {
            let nf = f64::from(n);
            ln_scaled_u_integral(nf, nf - a + 1.0, theta, &policy)
        },
        route,
        &policy,
    )
}

/// E[(1+γ)^{−A}] over κ-μ shadowed fading.
pub fn eff_rate_inner_kms(p: &KappaMuShadowedParams, q: &DelayQoS) -> Result<f64> {
    Ok(eff_rate_inner_ln_kms(p, q)?.exp())
}

/// Effective rate over κ-μ shadowed fading, bits/s/Hz.
pub fn eff_rate_kms(p: &KappaMuShadowedParams, q: &DelayQoS) -> Result<f64> {
    rate_from_ln_inner(eff_rate_inner_ln_kms(p, q)?, q)
}

/// ln E[(1+γ)^{−A}] over Fisher-F fading:
/// Ω^m B(m, m_s+A)/B(m, m_s) ₂F₁(m+m_s, m; m+m_s+A; 1−Ω).
pub fn eff_rate_inner_ln_f(p: &FisherFParams, q: &DelayQoS) -> Result<f64> {
    let (m, ms, omega) = (p.m(), p.m_s(), p.omega());
    let a = q.a_exponent;
    let f = gauss_2f1(
        m + ms,
        m,
        m + ms + a,
        1.0 - omega,
        &AccuracyPolicy::default(),
    )?;
    if !(f > 0.0) {
        return Err(domain(
            "eff_rate_f",
            format!("hypergeometric factor is {f}"),
        ));
    }
    Ok(m * omega.ln() + ln_beta(m, ms + a)? - ln_beta(m, ms)? + f.ln())
}

/// E[(1+γ)^{−A}] over Fisher-F fading.
pub fn eff_rate_inner_f(p: &FisherFParams, q: &DelayQoS) -> Result<f64> {
    Ok(eff_rate_inner_ln_f(p, q)?.exp())
}

/// Effective rate over Fisher-F fading, bits/s/Hz.
pub fn eff_rate_f(p: &FisherFParams, q: &DelayQoS) -> Result<f64> {
    rate_from_ln_inner(eff_rate_inner_ln_f(p, q)?, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physical_constructor() {
        let q = DelayQoS::from_physical(LN_2, 2.0, 0.5).unwrap();
        assert!((q.a_exponent() - 1.0).abs() < 1e-15);
        assert!(DelayQoS::new(0.0).is_err());
    }

    #[test]
    fn f_inner_at_zero_argument() {
        // γ̄ = m/m_s makes Ω = 1 and the ₂F₁ argument 0.
        let p = FisherFParams::new(2.0, 3.0, 2.0 / 3.0).unwrap();
        let q = DelayQoS::new(1.0).unwrap();
        let want = (ln_beta(2.0, 4.0).unwrap() - ln_beta(2.0, 3.0).unwrap()).exp();
        assert!((eff_rate_inner_f(&p, &q).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn kms_routes_agree() {
        let p = KappaMuShadowedParams::new(4.0, 3, 1, 10.0).unwrap();
        for a in [0.5, 1.0, 5.0] {
            let q = DelayQoS::new(a).unwrap();
            let f = eff_rate_inner_ln_kms_route(&p, &q, Route::Finite).unwrap();
            let s = eff_rate_inner_ln_kms_route(&p, &q, Route::Series).unwrap();
            assert!((f - s).abs() < 1e-10, "A = {a}: {f} vs {s}");
        }
    }
}
