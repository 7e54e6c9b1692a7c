//! Operational synthesis experiments.

mod codebook;
mod eavesdrop;
mod experiments;
mod model;
mod report;
mod rng;
mod system;

pub use codebook::{index_count, sample_codebook, SuperpositionCodebook};
pub use eavesdrop::{eavesdropper_independence_test, IndependenceTest};
pub use experiments::{
    cascade_experiment, relay_scheme_experiment, softcover_experiment, superposition_softcover_experiment,
    x_marginal_deviation, RelayRates, Sweep, RELAY_COMMON_MARGIN,
};
pub use report::{BlockSummary, ExperimentReport, TrialRecord, VERSION};
pub use system::{
    general_cascade_exact, iid_sequence, induced_distribution_exact, likelihood_encoder_posterior,
    physical_markov_deviations, sample_cascade, secrecy_tv, synthesis_tv, CascadeSample, CascadeSystem,
    InducedDistribution, SYSTEM_TOLERANCE,
};
