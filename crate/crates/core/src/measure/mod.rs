//! Pushforward densities of weighted Lebesgue measure under length-type
//! maps, level-set disintegration, the primitive/complement operators on
//! densities, and polynomial-plus-exponentially-small-remainder fitting.

mod engines;
mod fr;
mod grid;

pub use engines::{
    disintegrate_density, pushforward_density, pushforward_with, InnerIntegration,
};
pub use fr::{fr_bound_check, fr_decompose, linear_conv_oracle, FrReport};
pub use grid::{
    l1_distance_with_error, op_l, op_p, pseudo_length_transform, DensityGrid, DomainSpec,
    ExtraFactor, GridParams, LinearConstraint, TransformDirection, WeightSpec,
};
