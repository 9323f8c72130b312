//! Deterministic 2D THz radio-environment simulation and obstacle-sensing
//! scoring.
//!
//! The crate is `no_std` with `alloc`. It covers obstacle scene sampling
//! ([`scenario`]), propagation primitives ([`channel`]), single-interaction
//! ray tracing ([`raytrace`]), weight-targeted map encodings ([`envmap`]),
//! weighted MSE and average precision ([`metrics`]), and interpolation
//! baselines ([`baselines`]). File formats, dataset generation and the
//! command-line tool live in the `thz-envsense` crate.
#![cfg_attr(not(test), no_std)]
// `!(a > b)` also rejects NaN, which validation relies on.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod channel;
pub mod envmap;
pub mod geometry;
pub mod metrics;
pub mod raytrace;
pub mod scenario;

pub use channel::ChannelParams;
pub use envmap::{EncodeParams, EncodedMap, PriorMap, WeightMap};
pub use geometry::Point;
pub use metrics::{Detection, EvalReport};
pub use raytrace::{RadioMap, RayPath};
pub use scenario::{GridSpec, Obstacle, ObstacleMask, ScenarioConfig, Scene};
