//! Certification of continuous-variable EPR steering from discretized joint
//! position and momentum statistics.
//!
//! The crate bounds the conditional entropies `H(X_B|X_A)` and `H(K_B|K_A)`
//! from four numbers: the agreement probabilities measured inside the
//! detector windows and the probability that a coincidence lands inside
//! those windows. When the bound beats the uncertainty floor
//! `log2(pi e / (dx dk))`, the data steer. Losses from finite detector area,
//! dead space and detection efficiency fold into the domain probabilities.
//!
//! Modules:
//!
//! - [`entropy`]: entropy kernels and the distribution types.
//! - [`bounds`]: Fano bounds, steering certificates, key rate.
//! - [`stats`]: agreement extraction, Gaussian domain fits, error bars,
//!   hedging and violation maps.
//! - [`spdc_sim`]: synthetic double-Gaussian photon pair data.
//! - [`harness`]: file formats, configuration and the command pipeline
//!   behind the `fanosteer` binary.

pub mod bounds;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod normal;
pub mod spdc_sim;
pub mod stats;

pub use bounds::{
    discrete_steering_check, fano_bound, fano_steering_lhs, modified_fano_bound, secret_key_rate,
    steering_certificate, steering_rhs, BoundReport, CorrelationStats, DetectorGeometry, Verdict,
};
pub use entropy::{JointDistribution, ProbabilityVector};
pub use error::{Error, Result};
