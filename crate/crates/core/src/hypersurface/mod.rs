//! Extrinsic geometry of a hypersurface `Σ = {s = 0}` through the base point.

pub mod chart;
pub mod extrinsic;
pub mod identities;
pub mod normalize;

pub use chart::{check_defining_function, pull_back_metric, HypersurfaceChart};
pub use extrinsic::{
    extended_form, normal_derivative, normal_pair, normal_sandwich, trace_free, ExtrinsicOptions,
    ExtrinsicPack,
};
