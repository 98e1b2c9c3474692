//! Extrinsic per-edge symmetry weights.
//!
//! Each edge defines a candidate mirror plane: the plane containing the edge
//! and the halfway vector of its two face normals. The weight of the edge is
//! the fraction of mesh vertices that either lie on that plane or can be
//! paired with a distinct vertex across it.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::mesh::{EdgeKey, Mesh, VertexId};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryConfig {
    /// Matching distance in model units.
    pub delta: f64,
    pub enabled: bool,
}

impl SymmetryConfig {
    /// `1e-3` of the bounding-box diagonal.
    pub fn for_mesh(mesh: &Mesh) -> Self {
        Self {
            delta: default_delta(mesh),
            enabled: true,
        }
    }
}

pub fn default_delta(mesh: &Mesh) -> f64 {
    1e-3 * mesh.bounding_box_diagonal()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryPlane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl SymmetryPlane {
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p - self.point).dot(&self.normal)
    }

    pub fn mirror(&self, p: &Vec3) -> Vec3 {
        p - self.normal * (2.0 * self.signed_distance(p))
    }
}

/// Candidate mirror plane of `edge`, or `None` for non-manifold edges,
/// degenerate faces and faces with opposite normals.
pub fn edge_symmetry_plane(mesh: &Mesh, edge: EdgeKey) -> Option<SymmetryPlane> {
    let (p0, p1) = (mesh.position(edge.lo()), mesh.position(edge.hi()));
    let dir = (p1 - p0).try_normalize(0.0)?;
    let faces = mesh.edge_faces(edge)?;
    let reference = match *faces {
        [f] => mesh.face_normal_area(f).normal?,
        [f0, f1] => {
            let n0 = mesh.face_normal_area(f0).normal?;
            let n1 = mesh.face_normal_area(f1).normal?;
            (n0 + n1).try_normalize(1e-9)?
        }
        _ => return None,
    };
    let normal = reference.cross(&dir).try_normalize(1e-12)?;
    Some(SymmetryPlane { point: p0, normal })
}

/// Uniform hash grid over vertex positions with cells of size `cell`.
struct PointGrid {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<VertexId>>,
}

impl PointGrid {
    fn new(mesh: &Mesh, cell: f64) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<VertexId>> = HashMap::new();
        for v in 0..mesh.vertex_slots() as VertexId {
            if mesh.is_vertex_alive(v) {
                cells
                    .entry(Self::key(cell, &mesh.position(v)))
                    .or_default()
                    .push(v);
            }
        }
        Self { cell, cells }
    }

    fn key(cell: f64, p: &Vec3) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    fn near(&self, p: &Vec3) -> impl Iterator<Item = VertexId> + '_ {
        let [x, y, z] = Self::key(self.cell, p);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| {
                    self.cells
                        .get(&[x + dx, y + dy, z + dz])
                        .into_iter()
                        .flatten()
                        .copied()
                })
            })
        })
    }
}

fn matched_with_grid(mesh: &Mesh, plane: &SymmetryPlane, delta: f64, grid: &PointGrid) -> usize {
    let n = mesh.vertex_slots();
    let mut used = vec![false; n];
    let mut matched = 0;
    let mut rest: Vec<(f64, VertexId)> = Vec::new();
    for v in 0..n as VertexId {
        if !mesh.is_vertex_alive(v) {
            continue;
        }
        let s = plane.signed_distance(&mesh.position(v));
        if s.abs() < delta {
            used[v as usize] = true;
            matched += 1;
        } else {
            rest.push((s.abs(), v));
        }
    }
    rest.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, v) in &rest {
        if used[v as usize] {
            continue;
        }
        let m = plane.mirror(&mesh.position(v));
        let partner = grid
            .near(&m)
            .filter(|&u| u != v && !used[u as usize])
            .map(|u| ((mesh.position(u) - m).norm(), u))
            .filter(|(d, _)| *d < delta)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, u)) = partner {
            used[v as usize] = true;
            used[u as usize] = true;
            matched += 2;
        }
    }
    matched
}

/// Number of vertices matched across `plane`: vertices within `delta` of
/// the plane count once, greedily formed mirror pairs count twice. Vertices
/// are visited by decreasing distance to the plane and take the unused
/// partner closest to their mirror image.
pub fn matched_vertex_count(mesh: &Mesh, plane: &SymmetryPlane, delta: f64) -> usize {
    matched_with_grid(mesh, plane, delta, &PointGrid::new(mesh, delta))
}

/// Fraction of vertices matched across the plane of `edge`; 0 when the edge
/// has no plane.
pub fn symmetry_weight(mesh: &Mesh, edge: EdgeKey, delta: f64) -> f64 {
    weight_with_grid(mesh, edge, delta, &PointGrid::new(mesh, delta))
}

fn weight_with_grid(mesh: &Mesh, edge: EdgeKey, delta: f64, grid: &PointGrid) -> f64 {
    let count = mesh.vertex_count();
    match edge_symmetry_plane(mesh, edge) {
        Some(plane) if count > 0 => matched_with_grid(mesh, &plane, delta, grid) as f64 / count as f64,
        _ => 0.0,
    }
}

/// Symmetry weight of every edge, computed in parallel.
pub fn all_symmetry_weights(mesh: &Mesh, delta: f64) -> HashMap<EdgeKey, f64> {
    let grid = PointGrid::new(mesh, delta);
    mesh.edges()
        .into_par_iter()
        .map(|e| (e, weight_with_grid(mesh, e, delta, &grid)))
        .collect()
}
