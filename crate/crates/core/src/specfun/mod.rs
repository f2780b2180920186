//! Special functions used by the closed-form metrics.
//!
//! Everything here is a pure function of its arguments. Series are summed
//! until three consecutive terms fall below `rel_tol` times the partial sum
//! (see [`AccuracyPolicy`]); where cancellation would otherwise destroy the
//! result the partial sums are carried in double-double arithmetic.

mod dd;
mod gamma;
mod hypergeometric;
mod marcum;

pub use gamma::{
    beta, binomial, gamma, ln_beta, ln_gamma, lower_inc_gamma, pochhammer, recip_gamma,
    regularized_beta, regularized_gamma_p, regularized_gamma_q, upper_inc_gamma,
};
pub use hypergeometric::{
    gauss_2f1, gauss_2f1_euler, gauss_2f1_series, hyp_2f2, kummer_1f1, kummer_1f1_series,
    ln_tricomi_u, tricomi_u, tricomi_u_scaled,
};
pub use marcum::marcum_q;

pub(crate) use dd::neumaier_sum;
pub(crate) use gamma::{regularized_beta_split, regularized_gamma_pq};
pub(crate) use hypergeometric::ln_scaled_u_integral;
pub(crate) use marcum::marcum_pq;

use crate::error::{Error, Result};

/// Convergence controls for series and iterative evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPolicy {
    rel_tol: f64,
    max_terms: usize,
}

impl AccuracyPolicy {
    pub const DEFAULT_REL_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_TERMS: usize = 10_000;

    /// `rel_tol` must lie in `(0, 1e-3)` and `max_terms` must be at least 100.
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1e-3), got {rel_tol}"
            )));
        }
        if max_terms < 100 {
            return Err(Error::InvalidParameter(format!(
                "max_terms must be at least 100, got {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for AccuracyPolicy {
    fn default() -> Self {
        Self {
            rel_tol: Self::DEFAULT_REL_TOL,
            max_terms: Self::DEFAULT_MAX_TERMS,
        }
    }
}

/// True when `x` is zero or a negative integer.
pub(crate) fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}
