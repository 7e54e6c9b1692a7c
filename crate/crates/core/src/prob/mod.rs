//! Exact finite-alphabet probability.

mod channel;
mod distribution;
mod info;

pub use channel::Channel;
pub use distribution::{
    FiniteDistribution, JointDistribution, Variable, DEFAULT_SIZE_GUARD, DENSE_LIMIT,
    SUM_TOLERANCE,
};
pub use info::{
    conditional_mutual_information, empirical_distribution, entropy, is_markov,
    mutual_information, product_extension, total_variation, ROUNDOFF_FLOOR,
};

pub(crate) use distribution::increment;
