//! Rate regions: closed-form corner sets, coupling evaluation and search.

mod coupling;
mod frontier;
mod hull;
mod optimize;
mod search;
mod task;
mod variation;

pub use coupling::{
    check_membership_d, check_membership_with_slack, rate_triple, u_name, y_name, AuxiliaryCoupling,
    Layout, MembershipReport, DEFAULT_CARD_SLACK,
};
pub(crate) use coupling::{aux_names as aux_names_of, observed_names as observed_names_of};
pub use frontier::{point_in_region, Corner, RatePoint, RegionFrontier, HULL_TOLERANCE};
pub use hull::HullFacet;
pub use optimize::{cascade_common_information, minimize_rates, triple_wyner, wyner_common_information};
pub use search::OptimizerConfig;
pub use task::{
    cascade_task_coupling, cascade_task_target, scatter_corner, scatter_coupling, scatter_empirical_rate,
    scatter_gap, scatter_relay_region, scatter_target, task_corner, task_coupling, task_generator,
    task_region, task_target,
};
pub use variation::{general_cascade_rates, variation_rates, Variation, VariationBounds};
