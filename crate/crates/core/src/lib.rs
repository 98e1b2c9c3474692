//! Quad-dominant simplification of hybrid triangle/quad meshes.
//!
//! The crate is organised around a single greedy edge-collapse engine
//! ([`decimate::decimate`]) driven by per-vertex quadrics with per-edge
//! tangent-space terms. Collapses whose costs are approximately equal are
//! ordered by the recency of collapsed opposing quad edges, which removes
//! whole quad chords instead of scattering triangles over flat regions.
//!
//! Supporting modules cover symmetry and skinning-aware edge weights,
//! attribute and joint-influence functionals, surface metrics, and the OBJ
//! plus JSON skin sidecar formats used by the command-line tool.

pub mod attributes;
pub mod decimate;
pub mod edge_weight;
mod error;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod quadric;
pub mod symmetry;

pub use error::{Error, Result};

/// 3-vector used for positions, normals and gradients.
pub type Vec3 = nalgebra::Vector3<f64>;
