//! Computational laboratory for geodesic length functions on hyperbolic
//! surfaces: SL2(R) holonomy of combinatorial loops over a pants
//! decomposition, length functions in Fenchel-Nielsen coordinates, density
//! estimation of length spectra by two independent engines, polynomial-plus-
//! exponential-remainder fitting, and desk-scale mapping-class-group orbit
//! counting.

pub mod error;
pub mod hypmat;
pub mod integrate;
pub mod lengths;
pub mod loops;
pub mod measure;
pub mod numeric;
pub mod orbit;
pub mod pants;
pub mod rng;

pub use error::{ElementKind, Error, Result};
pub use hypmat::{
    compose, invert, make_generator, smat, trace_signed, trace_to_length, GeneratorKind, Letter,
    Mat2, SignedTrace,
};
pub use integrate::{
    counting_curve, density_via_formula, expectation_via_formula, ExpectationConfig, LengthMap,
    Normalization, Polynomial, TestFunction, VolumeRegistry,
};
pub use lengths::{
    boundary_growth_probe, calibrate_twist_origin, exp_sum_fit, loop_length, okai_dual_length,
    ray_asymptotics, ExpSumForm, FnDirection, FnPoint, GrowthReport, LinearForm3, ProbeGrid,
    RayReport,
};
pub use loops::{
    check_resolution, dehn_twist, holonomy_loop, holonomy_pants, incursion_matrix, split_resolve,
    CurveKind, Incursion, LoopSpec, PantsNode, PantsWord, ResolutionReport, SignCase, SurfaceGraph,
};
pub use measure::{
    disintegrate_density, fr_bound_check, fr_decompose, linear_conv_oracle, op_l, op_p,
    pseudo_length_transform, pushforward_density, DensityGrid, DomainSpec, FrReport, GridParams,
    InnerIntegration, TransformDirection, WeightSpec,
};
pub use orbit::{canonical_word, enumerate_orbit, mcg_neighbors, torus_rep, OrbitEntry};
pub use pants::{solve_pants, PantsTrig};
