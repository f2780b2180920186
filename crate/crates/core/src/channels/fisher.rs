use rand::RngCore;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, Error, Result};
use crate::specfun::{ln_beta, regularized_beta_split};

use super::Density;

/// Fisher-Snedecor F fading: γ = γ̄ (G₁/m)/(G₂/m_s) with G₁ ~ Gamma(m),
/// G₂ ~ Gamma(m_s), i.e. density Ω^m γ^{m−1} (1+Ωγ)^{−(m+m_s)} / B(m, m_s)
/// with Ω = m/(m_s γ̄).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherFParams {
    m: f64,
    m_s: f64,
    mean_snr: f64,
    omega: f64,
}

impl FisherFParams {
    pub fn new(m: f64, m_s: f64, mean_snr: f64) -> Result<Self> {
        for (name, v) in [("m", m), ("m_s", m_s), ("mean SNR", mean_snr)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            m,
            m_s,
            mean_snr,
            omega: m / (m_s * mean_snr),
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn m_s(&self) -> f64 {
        self.m_s
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Whether E[γ] exists (m_s > 1). It then equals γ̄ m_s/(m_s − 1).
    pub fn finite_mean(&self) -> bool {
        self.m_s > 1.0
    }

    pub fn with_mean_snr(&self, mean_snr: f64) -> Result<Self> {
        Self::new(self.m, self.m_s, mean_snr)
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(domain("f_pdf", format!("gamma must be >= 0, got {gamma}")));
        }
        if gamma.is_infinite() {
            return Ok(0.0);
        }
        let ln_b = ln_beta(self.m, self.m_s)?;
        if gamma == 0.0 {
            return if self.m < 1.0 {
                Err(domain("f_pdf", "density is unbounded at 0 when m < 1"))
            } else if self.m == 1.0 {
                Ok((self.omega.ln() - ln_b).exp())
            } else {
                Ok(0.0)
            };
        }
        let x = self.omega * gamma;
        let ln = self.m * self.omega.ln() - ln_b + (self.m - 1.0) * gamma.ln()
            - (self.m + self.m_s) * x.ln_1p();
        Ok(ln.exp())
    }

    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(domain("f_cdf", format!("gamma must be >= 0, got {gamma}")));
        }
        if gamma.is_infinite() {
            return Ok(1.0);
        }
        let x = self.omega * gamma;
        regularized_beta_split(self.m, self.m_s, x / (1.0 + x), 1.0 / (1.0 + x))
    }

    pub fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        let g1 = Gamma::new(self.m, 1.0).expect("validated shape");
        let g2 = Gamma::new(self.m_s, 1.0).expect("validated shape");
        let scale = self.mean_snr * self.m_s / self.m;
        (0..n)
            .map(|_| {
                let a = g1.sample(rng);
                scale * a / g2.sample(rng)
            })
            .collect()
    }
}

impl Density for FisherFParams {
    fn name(&self) -> &'static str {
        "fisher"
    }

    fn mean_snr(&self) -> f64 {
        self.mean_snr
    }

    fn pdf(&self, gamma: f64) -> Result<f64> {
        FisherFParams::pdf(self, gamma)
    }

    fn cdf(&self, gamma: f64) -> Result<f64> {
        FisherFParams::cdf(self, gamma)
    }

    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
        FisherFParams::sample(self, rng, n)
    }

    fn origin_exponent(&self) -> f64 {
        self.m
    }

    /// Exact: P(γ > x) = I_{1/(1+Ωx)}(m_s, m).
    fn tail_bound(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let t = self.omega * x;
        regularized_beta_split(self.m_s, self.m, 1.0 / (1.0 + t), t / (1.0 + t)).unwrap_or(1.0)
    }

    fn scale(&self) -> f64 {
        1.0 / self.omega
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_and_flags() {
        let p = FisherFParams::new(2.0, 3.0, 4.0).unwrap();
        assert!((p.omega() - 2.0 / 12.0).abs() < 1e-16);
        assert!(p.finite_mean());
        assert!(!FisherFParams::new(2.0, 0.9, 4.0).unwrap().finite_mean());
        assert!(FisherFParams::new(0.0, 3.0, 4.0).is_err());
    }

    #[test]
    fn boundary_density() {
        // B(1, m_s) = 1/m_s
        let p = FisherFParams::new(1.0, 2.5, 3.0).unwrap();
        assert!((p.pdf(0.0).unwrap() - p.omega() * 2.5).abs() < 1e-14);
        assert!(FisherFParams::new(0.8, 2.5, 3.0).unwrap().pdf(0.0).is_err());
        assert_eq!(
            FisherFParams::new(2.0, 2.5, 3.0).unwrap().pdf(0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn tail_complements_cdf() {
        let p = FisherFParams::new(2.3, 1.7, 5.0).unwrap();
        for g in [0.1, 1.0, 10.0, 1e3] {
            assert!((p.cdf(g).unwrap() + p.tail_bound(g) - 1.0).abs() < 1e-14);
        }
    }
}
