use rand::RngCore;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, Error, Result};
use crate::integrate::{try_integrate, QuadOptions};
use crate::specfun::{
    binomial, ln_gamma, neumaier_sum, pochhammer, regularized_gamma_p, regularized_gamma_pq,
    AccuracyPolicy,
};

use super::Density;

/// Below this κ the two Gamma factors are merged (θ₁ = θ₂ to working precision).
pub(crate) const KAPPA_MERGE: f64 = 1e-6;

/// From this m upward the alternating sums lose too many digits and the
/// density is evaluated by numerical convolution instead.
pub(crate) const MAX_CLOSED_FORM_M: u32 = 25;

/// κ-μ shadowed fading with integer μ ≥ m ≥ 1.
///
/// The SNR is γ = γ₁ + γ₂ with independent γ₁ ~ Gamma(μ−m, rate θ₁) and
/// γ₂ ~ Gamma(m, rate θ₂), where θ₁ = μ(1+κ)/γ̄ and θ₂ = mθ₁/(μκ+m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaMuShadowedParams {
    kappa: f64,
    mu: u32,
    m: u32,
    mean_snr: f64,
    theta1: f64,
    theta2: f64,
}

/// How the density is evaluated for a given parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum KmsForm {
    /// A single Gamma(shape, rate) law.
    Gamma { shape: u32, rate: f64 },
    /// The genuine two-factor convolution.
    Mixture,
}

impl KappaMuShadowedParams {
    pub fn new(kappa: f64, mu: u32, m: u32, mean_snr: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be >= 0, got {kappa}"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter(
                "m must be a positive integer".into(),
            ));
        }
        if mu < m {
            return Err(Error::InvalidParameter(format!(
                "need mu >= m, got mu = {mu}, m = {m}"
            )));
        }
        if !(mean_snr > 0.0 && mean_snr.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mean SNR must be positive, got {mean_snr}"
            )));
        }
        let muf = f64::from(mu);
        let mf = f64::from(m);
        let theta1 = muf * (1.0 + kappa) / mean_snr;
        let theta2 = mf * theta1 / (muf * kappa + mf);
        Ok(Self {
            kappa,
            mu,
            m,
            mean_snr,
            theta1,
            theta2,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    /// Same fading parameters at another mean SNR.
    pub fn with_mean_snr(&self, mean_snr: f64) -> Result<Self> {
        Self::new(self.kappa, self.mu, self.m, mean_snr)
    }

    pub(crate) fn form(&self) -> KmsForm {
        if self.kappa < KAPPA_MERGE {
            KmsForm::Gamma {
                shape: self.mu,
                rate: self.theta1,
            }
        } else if self.mu == self.m {
            KmsForm::Gamma {
                shape: self.m,
                rate: self.theta2,
            }
        } else {
            KmsForm::Mixture
        }
    }

    /// Moment generating function E[e^{sγ}] for s < θ₂.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        if !(s < self.theta2) {
            return Err(domain(
                "kms_mgf",
                format!("need s < theta2 = {}, got {s}", self.theta2),
            ));
        }
        let a = f64::from(self.mu - self.m);
        let mf = f64::from(self.m);
        Ok((-a * (-s / self.theta1).ln_1p() - mf * (-s / self.theta2).ln_1p()).exp())
    }

    fn check_gamma(func: &'static str, gamma: f64) -> Result<()> {
        if gamma >= 0.0 {
            Ok(())
        } else {
            Err(domain(func, format!("gamma must be >= 0, got {gamma}")))
        }
    }

    /// Probability density of γ.
    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        Self::check_gamma("kms_pdf", gamma)?;
        if gamma.is_infinite() {
            return Ok(0.0);
        }
        match self.form() {
            KmsForm::Gamma { shape, rate } => Ok(gamma_pdf(f64::from(shape), rate, gamma)),
            KmsForm::Mixture if self.m >= MAX_CLOSED_FORM_M => self.pdf_convolution(gamma),
            KmsForm::Mixture => {
                if gamma == 0.0 {
                    return Ok(0.0);
                }
                let a = f64::from(self.mu - self.m);
                let mf = f64::from(self.m);
                let sum = self.k_sum(self.m - 1, gamma)?;
                let ln_front = a * self.theta1.ln() + mf * self.theta2.ln()
                    - ln_gamma(mf)?
                    - self.theta2 * gamma
                    + (mf - 1.0 + a) * gamma.ln();
                Ok((ln_front.exp() * sum).max(0.0))
            }
        }
    }

    /// Σ_{i≤r} C(r,i) (−1)^i (μ−m)_i h(μ−m+i, (θ₁−θ₂)γ), where
    /// h(s, y) = P(s, y)/y^s.
    fn k_sum(&self, r: u32, gamma: f64) -> Result<f64> {
        let a = f64::from(self.mu - self.m);
        let y = (self.theta1 - self.theta2) * gamma;
        let mut terms = Vec::with_capacity(r as usize + 1);
        for i in 0..=r {
            let c = binomial(u64::from(r), u64::from(i))? as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(sign * c * pochhammer(a, i) * scaled_lower_gamma(a + f64::from(i), y)?);
        }
        Ok(neumaier_sum(terms).0)
    }

    /// Convolution of the two Gamma factors by quadrature.
    fn pdf_convolution(&self, gamma: f64) -> Result<f64> {
        if gamma == 0.0 {
            return Ok(0.0);
        }
        let a = f64::from(self.mu - self.m);
        let mf = f64::from(self.m);
        let d = self.theta1 - self.theta2;
        let ln_c = a * self.theta1.ln() + mf * self.theta2.ln()
            - ln_gamma(a)?
            - ln_gamma(mf)?
            - self.theta2 * gamma;
        // Integrand x^{a−1} (γ−x)^{m−1} e^{−dx}, scaled by its maximum.
        let phi = |x: f64| (a - 1.0) * x.ln() + (mf - 1.0) * (gamma - x).ln() - d * x;
        let peak = interior_peak(a - 1.0, mf - 1.0, d, gamma);
        let reference = phi(peak);
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        };
        let r = try_integrate(
            |x| {
                Ok(if x <= 0.0 || x >= gamma {
                    0.0
                } else {
                    (phi(x) - reference).exp()
                })
            },
            &[0.0, peak, gamma],
            &opts,
        )?;
        Ok((ln_c + reference).exp() * r.value)
    }

    /// Cumulative distribution function of γ.
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        Self::check_gamma("kms_cdf", gamma)?;
        if gamma == 0.0 {
            return Ok(0.0);
        }
        if gamma.is_infinite() {
            return Ok(1.0);
        }
        match self.form() {
            KmsForm::Gamma { shape, rate } => regularized_gamma_p(f64::from(shape), rate * gamma),
            KmsForm::Mixture if self.m >= MAX_CLOSED_FORM_M => self.cdf_convolution(gamma),
            KmsForm::Mixture => {
                let a = f64::from(self.mu - self.m);
                let mut terms = vec![regularized_gamma_p(a, self.theta1 * gamma)?];
                let ln_base = a * self.theta1.ln() - self.theta2 * gamma + a * gamma.ln();
                let mut ln_fact = 0.0;
                for r in 0..self.m {
                    if r > 0 {
                        ln_fact += f64::from(r).ln();
                    }
                    let rf = f64::from(r);
                    let ln_w = ln_base + rf * (self.theta2 * gamma).ln() - ln_fact;
                    terms.push(-ln_w.exp() * self.k_sum(r, gamma)?);
                }
                Ok(neumaier_sum(terms).0.clamp(0.0, 1.0))
            }
        }
    }

    fn cdf_convolution(&self, gamma: f64) -> Result<f64> {
        // P(γ ≤ g) = ∫₀^g f₁(x) P(m, θ₂(g − x)) dx
        let a = f64::from(self.mu - self.m);
        let mf = f64::from(self.m);
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        };
        let peak = ((a - 1.0) / self.theta1).clamp(0.0, gamma);
        let r = try_integrate(
            |x| {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                let inner = regularized_gamma_pq(mf, self.theta2 * (gamma - x))?.0;
                Ok(gamma_pdf(a, self.theta1, x) * inner)
            },
            &[0.0, peak, gamma],
            &opts,
        )?;
        Ok(r.value.clamp(0.0, 1.0))
    }

    /// Draws `n` variates as the sum of the two Gamma factors.
    pub fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        let g2 =
            Gamma::new(f64::from(self.m), 1.0 / self.theta2).expect("validated shape and rate");
        let g1 = (self.mu > self.m).then(|| {
            Gamma::new(f64::from(self.mu - self.m), 1.0 / self.theta1)
                .expect("validated shape and rate")
        });
        (0..n)
            .map(|_| {
                let first = g1.as_ref().map_or(0.0, |g| g.sample(rng));
                first + g2.sample(rng)
            })
            .collect()
    }
}

/// Which representation [`KappaMuShadowedParams::average_ln`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum Route {
    /// Finite form where well conditioned, otherwise the mixture series.
    Auto,
    /// Finite double sum over the Gamma(·, θ₁) and Gamma(·, θ₂) kernels.
    Finite,
    /// Negative-binomial mixture of Gamma(μ+n, θ₁) laws.
    Series,
}

/// Largest acceptable estimated relative error of the finite form.
const FINITE_FORM_MAX_ERR: f64 = 1e-9;

/// Running log-sum-exp of positive terms.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    shift: f64,
    scaled: f64,
}

impl LogSum {
    fn new() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term > self.shift {
            self.scaled = self.scaled * (self.shift - ln_term).exp() + 1.0;
            self.shift = ln_term;
        } else {
            self.scaled += (ln_term - self.shift).exp();
        }
    }

    fn ln(&self) -> f64 {
        self.shift + self.scaled.ln()
    }
}

impl KappaMuShadowedParams {
    /// ln E[g(γ)] given `ln_kernel(n, θ)` = ln E[g(X)] for X ~ Gamma(n, rate θ),
    /// where 0 ≤ g ≤ 1.
    ///
    /// With integer μ ≥ m the law of γ is the mixture
    /// Σ_n θ₂^m/θ₁^m · C(n+m−1, n) (1 − θ₂/θ₁)^n · Gamma(μ+n, θ₁),
    /// which the series route sums directly. The finite route expands the
    /// density termwise into Gamma(·, θ₁) and Gamma(·, θ₂) kernels.
    pub(crate) fn average_ln<K>(
        &self,
        mut ln_kernel: K,
        route: Route,
        policy: &AccuracyPolicy,
    ) -> Result<f64>
    where
        K: FnMut(u32, f64) -> Result<f64>,
    {
        if let KmsForm::Gamma { shape, rate } = self.form() {
            return ln_kernel(shape, rate);
        }
        let delta = (self.theta1 - self.theta2) / self.theta1;
        let use_series = match route {
            Route::Series => true,
            Route::Finite => false,
            Route::Auto => self.m >= MAX_CLOSED_FORM_M || delta <= 0.6,
        };
        if !use_series {
            match self.finite_average_ln(&mut ln_kernel, policy) {
                Ok(v) => return Ok(v),
                Err(Error::IllConditioned { .. }) if route == Route::Auto => {}
                Err(e) => return Err(e),
            }
        }
        self.series_average_ln(&mut ln_kernel, policy)
    }

    fn finite_average_ln<K>(&self, ln_kernel: &mut K, policy: &AccuracyPolicy) -> Result<f64>
    where
        K: FnMut(u32, f64) -> Result<f64>,
    {
        let a = self.mu - self.m;
        let af = f64::from(a);
        let mf = f64::from(self.m);
        let r1 = self.theta2 / self.theta1;
        let delta = (self.theta1 - self.theta2) / self.theta1;
        let (ln_r1, ln_delta) = (r1.ln(), delta.ln());
        let ln_gm = ln_gamma(mf)?;
        // (sign, ln|term|)
        let mut terms: Vec<(f64, f64)> = Vec::new();
        for i in 0..self.m {
            let fi = f64::from(i);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let ln_poch = if a == 0 {
                0.0
            } else {
                ln_gamma(af + fi)? - ln_gamma(af)?
            };
            let ln_c2 = ln_poch - ln_gamma(fi + 1.0)? - af * ln_delta + fi * (ln_r1 - ln_delta);
            terms.push((sign, ln_c2 + ln_kernel(self.m - i, self.theta2)?));
            let ln_binom = (binomial(u64::from(self.m - 1), u64::from(i))? as f64).ln();
            for k in 0..(a + i) {
                let fk = f64::from(k);
                let n = self.m - i + k;
                let ln_c1 = mf * ln_r1 + ln_binom + ln_poch + ln_gamma(f64::from(n))?
                    - ln_gm
                    - ln_gamma(fk + 1.0)?
                    + (fk - af - fi) * ln_delta;
                terms.push((-sign, ln_c1 + ln_kernel(n, self.theta1)?));
            }
        }
        let shift = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let (sum, abs_sum) = neumaier_sum(terms.iter().map(|(s, l)| s * (l - shift).exp()));
        let rel_err = abs_sum / sum.abs() * policy.rel_tol().max(f64::EPSILON) * 4.0;
        if !(sum > 0.0) || !(rel_err <= FINITE_FORM_MAX_ERR) {
            return Err(Error::IllConditioned {
                func: "kappa-mu shadowed average",
                rel_err: if sum > 0.0 { rel_err } else { f64::INFINITY },
            });
        }
        Ok(shift + sum.ln())
    }

    fn series_average_ln<K>(&self, ln_kernel: &mut K, policy: &AccuracyPolicy) -> Result<f64>
    where
        K: FnMut(u32, f64) -> Result<f64>,
    {
        let mf = f64::from(self.m);
        let delta = (self.theta1 - self.theta2) / self.theta1;
        let mut ln_w = mf * (self.theta2 / self.theta1).ln();
        let mut acc = LogSum::new();
        let tol = policy.rel_tol() * 1e-2;
        for n in 0..policy.max_terms() as u32 {
            let nf = f64::from(n);
            if n > 0 {
                ln_w += (delta * (nf - 1.0 + mf) / nf).ln();
            }
            acc.push(ln_w + ln_kernel(self.mu + n, self.theta1)?);
            // The kernel is at most 1, so the weight tail bounds the remainder.
            let rho = delta * (nf + mf) / (nf + 1.0);
            if rho < 1.0 {
                let ln_tail = ln_w + (rho / (1.0 - rho)).ln();
                if ln_tail < acc.ln() + tol.ln() {
                    return Ok(acc.ln());
                }
            }
        }
        Err(Error::Convergence {
            func: "kappa-mu shadowed mixture series",
            terms: policy.max_terms(),
        })
    }
}

impl Density for KappaMuShadowedParams {
    fn name(&self) -> &'static str {
        "kms"
    }

    fn mean_snr(&self) -> f64 {
        self.mean_snr
    }

    fn pdf(&self, gamma: f64) -> Result<f64> {
        KappaMuShadowedParams::pdf(self, gamma)
    }

    fn cdf(&self, gamma: f64) -> Result<f64> {
        KappaMuShadowedParams::cdf(self, gamma)
    }

    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        KappaMuShadowedParams::sample(self, rng, n)
    }

    fn origin_exponent(&self) -> f64 {
        f64::from(self.mu)
    }

    /// γ is stochastically smaller than Gamma(μ, θ₂) because θ₁ ≥ θ₂.
    fn tail_bound(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        regularized_gamma_pq(f64::from(self.mu), self.theta2 * x).map_or(1.0, |(_, q)| q)
    }

    fn scale(&self) -> f64 {
        self.mean_snr
    }
}

pub(crate) fn gamma_pdf(shape: f64, rate: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if shape == 1.0 {
            rate
        } else if shape < 1.0 {
            f64::INFINITY
        } else {
            0.0
        };
    }
    let ln = shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape).unwrap_or(0.0);
    ln.exp()
}

/// P(s, y)/y^s, finite and equal to 1/Γ(s+1) at y = 0.
fn scaled_lower_gamma(s: f64, y: f64) -> Result<f64> {
    if y < s + 1.0 {
        // e^{−y} Σ_n y^n / Γ(s+n+1)
        let mut term = (-ln_gamma(s + 1.0)?).exp();
        let mut sum = term;
        let mut n = 0.0;
        while term > 1e-17 * sum {
            n += 1.0;
            term *= y / (s + n);
            sum += term;
        }
        Ok((-y).exp() * sum)
    } else {
        Ok(regularized_gamma_pq(s, y)?.0 * (-s * y.ln()).exp())
    }
}

/// Maximizer of p ln x + q ln(g − x) − d x on (0, g) for p, q ≥ 0.
fn interior_peak(p: f64, q: f64, d: f64, g: f64) -> f64 {
    // Stationarity: d x² − (p + q + d g) x + p g = 0, smaller root.
    let b = p + q + d * g;
    let disc = (b * b - 4.0 * d * p * g).max(0.0);
    let x = if d > 0.0 {
        2.0 * p * g / (b + disc.sqrt())
    } else {
        p * g / (p + q).max(f64::MIN_POSITIVE)
    };
    x.clamp(0.0, g)
}
