use std::path::PathBuf;

use crate::mesh::EdgeKey;

/// Errors produced by mesh construction, decimation and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} has {arity} vertices; only triangles and quads are supported")]
    BadArity { face: usize, arity: usize },
    #[error("face {face} repeats vertex {vertex}")]
    RepeatedVertex { face: usize, vertex: usize },
    #[error("attribute `{name}` has {len} entries, expected {expected}")]
    AttributeLength {
        name: &'static str,
        len: usize,
        expected: usize,
    },
    #[error("unknown edge ({}, {})", .0.lo(), .0.hi())]
    UnknownEdge(EdgeKey),
    #[error("collapse of edge ({}, {}) is not valid", .0.lo(), .0.hi())]
    InvalidCollapse(EdgeKey),
    #[error("normal is not unit length (norm {0})")]
    NonUnitNormal(f64),
    #[error("mesh is empty")]
    EmptyMesh,
    #[error("mesh has zero surface area")]
    ZeroArea,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no joint functionals to finalize")]
    NoInfluences,
    #[error("vertex {vertex} references joint {joint}, but the skeleton has {joint_count} joints")]
    MissingJoint {
        vertex: usize,
        joint: u32,
        joint_count: usize,
    },
    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: schema violation at `{field}`: {message}", path.display())]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("invalid generator parameters: {0}")]
    SynthParams(String),
    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
