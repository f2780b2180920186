//! Fading-channel SNR distributions.

mod fisher;
mod kms;

pub use fisher::FisherFParams;
pub use kms::KappaMuShadowedParams;
pub(crate) use kms::Route;

use rand::RngCore;

use crate::error::Result;

/// Distribution of the instantaneous SNR γ ≥ 0 of a fading channel.
///
/// SNR values are linear throughout.
pub trait Density: Send + Sync + std::fmt::Debug {
    /// Registry name of the model.
    fn name(&self) -> &'static str;

    /// The mean-SNR parameter γ̄ the model was built with.
    fn mean_snr(&self) -> f64;

    fn pdf(&self, gamma: f64) -> Result<f64>;

    fn cdf(&self, gamma: f64) -> Result<f64>;

    /// Draws `n` independent variates from a caller-owned stream.
    fn sample(&self, rng: &mut dyn RngCore, n: usize) -> Vec<f64>;

    /// The exponent p for which pdf(γ) ~ γ^{p−1} as γ → 0.
    fn origin_exponent(&self) -> f64;

    /// An upper bound on P(γ > x), exact where a closed form is cheap.
    fn tail_bound(&self, x: f64) -> f64;

    /// Natural length scale of the distribution, used to place quadrature
    /// breakpoints.
    fn scale(&self) -> f64;
}
