//! Secure cascade channel synthesis over finite alphabets.
//!
//! - [`prob`]: exact distributions, information measures, total variation.
//! - [`regions`]: optimal rate regions, coupling search, frontier hulls.
//! - [`synth`]: superposition codebooks, the likelihood-encoder cascade and
//!   exact evaluation of its induced distribution.

pub mod error;
pub mod format;
pub mod prob;
pub mod regions;
pub mod synth;

pub use error::{Error, Result};
pub use prob::{Channel, FiniteDistribution, JointDistribution, Variable};
pub use regions::{AuxiliaryCoupling, OptimizerConfig, RatePoint, RegionFrontier};
