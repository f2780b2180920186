//! Energy-detection spectrum sensing and effective rate over composite fading.
//!
//! Two fading models are supported:
//!
//! - κ-μ shadowed fading with integer μ and m ([`KappaMuShadowedParams`]),
//!   whose SNR is the sum of two independent Gamma variates;
//! - Fisher-Snedecor F fading ([`FisherFParams`]), a Nakagami-m / inverse
//!   Nakagami-m composite whose SNR is a scaled F variate.
//!
//! For each model the crate evaluates closed-form expressions for the average
//! probability of detection of an energy detector, the average area under the
//! ROC curve and the effective rate under a statistical delay constraint.
//! Every closed form can be checked against direct quadrature of its defining
//! integral and against Monte Carlo simulation through the [`oracle`] module.
//!
//! The models implement [`FadingModel`] and are selected by name through a
//! [`ModelRegistry`], which is how the command-line front end picks a channel.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod capacity;
pub mod channels;
pub mod detection;
mod error;
pub mod integrate;
pub mod oracle;
pub mod registry;
pub mod specfun;

pub use capacity::DelayQoS;
pub use channels::{Density, FisherFParams, KappaMuShadowedParams};
pub use detection::{DetectorConfig, RocPoint, TruncationReport};
pub use error::{Error, Result};
pub use registry::{ChannelArgs, FadingModel, ModelRegistry};
pub use specfun::AccuracyPolicy;

/// Converts an SNR in decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear SNR to decibels.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
