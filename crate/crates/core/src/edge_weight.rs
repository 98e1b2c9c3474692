//! Tangent-space edge quadrics and their weights.
//!
//! For an edge `(e0, e1)` and each incident face `f`, the plane through the
//! edge that is perpendicular to `f` constrains vertex motion across the
//! edge inside the face's tangent plane. Its weight is the largest of the
//! normalised dihedral angle, the scaled symmetry weight, the scaled joint
//! distance and a floor of `0.01`.

use std::collections::HashMap;

pub use crate::attributes::joint_distance;
use crate::mesh::{EdgeKey, Mesh};
use crate::quadric::Quadric;
use crate::Vec3;

/// Lower bound on edge weights, keeping the tangent constraints non-degenerate.
pub const MIN_EDGE_WEIGHT: f64 = 1e-2;

/// How edge weights are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeWeightMode {
    /// No tangent-space quadrics at all (`w = 0`).
    None,
    /// Every edge weighted 1.
    Uniform,
    /// Dihedral angle, symmetry and joint terms.
    #[default]
    Dihedral,
}

/// How many tangent planes a manifold edge contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeQuadricMode {
    /// One plane per incident face.
    #[default]
    PerFace,
    /// A single plane built from the normalised sum of the face normals.
    AveragedNormal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWeightInputs {
    pub dihedral: f64,
    pub symmetry: f64,
    pub joint_distance: f64,
    pub lambda_sym: f64,
    pub lambda_joint: f64,
}

/// `(1/π)·arccos(n0·n1)` for an edge with exactly two faces, 1 otherwise.
pub fn dihedral_weight(mesh: &Mesh, edge: EdgeKey) -> f64 {
    match mesh.edge_faces(edge) {
        Some(&[f0, f1]) => {
            let (n0, n1) = (
                mesh.face_normal_area(f0).normal,
                mesh.face_normal_area(f1).normal,
            );
            match (n0, n1) {
                (Some(n0), Some(n1)) => n0.dot(&n1).clamp(-1.0, 1.0).acos() / std::f64::consts::PI,
                _ => 1.0,
            }
        }
        _ => 1.0,
    }
}

pub fn combined_weight(inputs: &EdgeWeightInputs) -> f64 {
    (inputs.lambda_sym * inputs.symmetry)
        .max(inputs.lambda_joint * inputs.joint_distance)
        .max(inputs.dihedral)
        .max(MIN_EDGE_WEIGHT)
}

/// The tangent-plane quadric of `edge`, scaled by `w·‖e0 − e1‖`. The same
/// quadric is added to both endpoints.
pub fn edge_quadric(mesh: &Mesh, edge: EdgeKey, w: f64, mode: EdgeQuadricMode) -> Quadric {
    let (p0, p1) = (mesh.position(edge.lo()), mesh.position(edge.hi()));
    let len = (p0 - p1).norm();
    if !(len > 0.0) {
        log::debug!("skipping zero-length edge {edge:?}");
        return Quadric::zero();
    }
    let dir = (p0 - p1) / len;
    let normals: Vec<Vec3> = mesh
        .edge_faces(edge)
        .unwrap_or(&[])
        .iter()
        .filter_map(|&f| mesh.face_normal_area(f).normal)
        .collect();
    let plane_normals: Vec<Vec3> = match mode {
        EdgeQuadricMode::PerFace => normals,
        EdgeQuadricMode::AveragedNormal => {
            let sum: Vec3 = normals.iter().sum();
            sum.try_normalize(1e-12).into_iter().collect()
        }
    };
    let scale = w * len;
    let mut q = Quadric::zero();
    for n in plane_normals {
        if let Some(pn) = dir.cross(&n).try_normalize(1e-12) {
            q += Quadric::plane_unchecked(&p0, &pn) * scale;
        }
    }
    q
}

/// Add the weighted tangent quadric of `edge` to both endpoint quadrics.
pub fn accumulate_edge_quadrics(
    mesh: &Mesh,
    edge: EdgeKey,
    w: f64,
    mode: EdgeQuadricMode,
    quadrics: &mut [Quadric],
) {
    let q = edge_quadric(mesh, edge, w, mode);
    quadrics[edge.lo() as usize] += q;
    quadrics[edge.hi() as usize] += q;
}

/// Inputs shared by every edge when computing weights in bulk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWeightConfig {
    pub mode: EdgeWeightMode,
    pub lambda_sym: f64,
    pub lambda_joint: f64,
}

impl Default for EdgeWeightConfig {
    fn default() -> Self {
        Self {
            mode: EdgeWeightMode::Dihedral,
            lambda_sym: 0.0,
            lambda_joint: 1.0,
        }
    }
}

/// Weight of every unique edge in sorted key order. `symmetry` supplies
/// per-edge symmetry weights when `lambda_sym > 0`.
pub fn batch_edge_weights(
    mesh: &Mesh,
    config: &EdgeWeightConfig,
    symmetry: Option<&HashMap<EdgeKey, f64>>,
) -> Vec<(EdgeKey, f64)> {
    let joints = mesh.attributes().joints.as_ref();
    mesh.edges()
        .into_iter()
        .map(|e| {
            let w = match config.mode {
                EdgeWeightMode::None => 0.0,
                EdgeWeightMode::Uniform => 1.0,
                EdgeWeightMode::Dihedral => {
                    let sym = symmetry.and_then(|m| m.get(&e)).copied().unwrap_or(0.0);
                    let jd = joints
                        .map(|j| joint_distance(&j[e.lo() as usize], &j[e.hi() as usize]))
                        .unwrap_or(0.0);
                    combined_weight(&EdgeWeightInputs {
                        dihedral: dihedral_weight(mesh, e),
                        symmetry: sym,
                        joint_distance: jd,
                        lambda_sym: config.lambda_sym,
                        lambda_joint: config.lambda_joint,
                    })
                }
            };
            (e, w)
        })
        .collect()
}
