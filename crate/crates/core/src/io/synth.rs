//! Deterministic synthetic test meshes.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix4, Rotation3, Translation3};

use crate::attributes::{Joint, JointInfluences, Skeleton, VertexAttributes};
use crate::io::skin::{NamedPose, SkinSidecar};
use crate::mesh::{Mesh, VertexId};
use crate::{Error, Result, Vec3};

/// Number of bend frames generated for the skinned cylinder.
pub const CYLINDER_FRAMES: usize = 50;

/// `w × h` unit quads in the z = 0 plane; vertex `(i, j)` has id
/// `j·(w+1) + i`.
pub fn grid(w: usize, h: usize) -> Mesh {
    let id = |i: usize, j: usize| (j * (w + 1) + i) as VertexId;
    let positions = (0..=h)
        .flat_map(|j| (0..=w).map(move |i| Vec3::new(i as f64, j as f64, 0.0)))
        .collect();
    let faces: Vec<Vec<VertexId>> = (0..h)
        .flat_map(|j| (0..w).map(move |i| vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
        .collect();
    Mesh::new(positions, &faces, VertexAttributes::default()).expect("grid is valid")
}

/// Closed cube of side 1 centred at the origin with `n × n` quads per side
/// and welded seams (`6n² + 2` vertices).
pub fn subdivided_cube(n: usize) -> Mesh {
    cube(n, 1.0, true)
}

/// Cube whose six sides are separate `(n+1) × (n+1)` vertex grids, as in
/// exporters that split vertices along UV seams (`6(n+1)²` vertices).
pub fn subdivided_cube_unwelded(n: usize, side: f64) -> Mesh {
    cube(n, side, false)
}

fn cube(n: usize, side: f64, welded: bool) -> Mesh {
    let n = n.max(1);
    let mut ids: HashMap<[usize; 4], VertexId> = HashMap::new();
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for axis in 0..3 {
        for positive in [false, true] {
            let (mut u, mut v) = ((axis + 1) % 3, (axis + 2) % 3);
            if !positive {
                std::mem::swap(&mut u, &mut v);
            }
            let mut vertex = |i: usize, j: usize| {
                let mut c = [0; 3];
                c[axis] = if positive { n } else { 0 };
                c[u] = i;
                c[v] = j;
                let key = if welded { [c[0], c[1], c[2], 0] } else { [c[0], c[1], c[2], 2 * axis + positive as usize] };
                *ids.entry(key).or_insert_with(|| {
                    let p = Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) / n as f64;
                    positions.push((p - Vec3::repeat(0.5)) * side);
                    (positions.len() - 1) as VertexId
                })
            };
            for j in 0..n {
                for i in 0..n {
                    faces.push(vec![vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)]);
                }
            }
        }
    }
    Mesh::new(positions, &faces, VertexAttributes::default()).expect("cube is valid")
}

/// Open tube along +z (radius 0.5, length 4) with `segments` quads around
/// and `rings` quads along, skinned to a chain of `bones` joints placed
/// evenly along the axis. Each vertex blends at most two neighbouring
/// joints. The sidecar carries [`CYLINDER_FRAMES`] poses bending the chain
/// from straight to 90° about x.
pub fn skinned_cylinder(segments: usize, rings: usize, bones: usize) -> Result<(Mesh, SkinSidecar)> {
    if segments < 3 || rings < 1 || bones < 1 {
        return Err(Error::SynthParams(format!(
            "skinned cylinder needs segments ≥ 3, rings ≥ 1, bones ≥ 1 (got {segments}, {rings}, {bones})"
        )));
    }
    let (radius, length) = (0.5, 4.0);
    let bone_len = length / bones as f64;
    let mut positions = Vec::new();
    let mut influences = Vec::new();
    for k in 0..=rings {
        let z = length * k as f64 / rings as f64;
        let inf = chain_influences(z / bone_len, bones);
        for s in 0..segments {
            let t = std::f64::consts::TAU * s as f64 / segments as f64;
            positions.push(Vec3::new(radius * t.cos(), radius * t.sin(), z));
            influences.push(inf.clone());
        }
    }
    let id = |k: usize, s: usize| (k * segments + s % segments) as VertexId;
    let faces: Vec<Vec<VertexId>> = (0..rings)
        .flat_map(|k| (0..segments).map(move |s| vec![id(k, s), id(k, s + 1), id(k + 1, s + 1), id(k + 1, s)]))
        .collect();
    let attributes = VertexAttributes {
        joints: Some(influences.clone()),
        ..Default::default()
    };
    let mesh = Mesh::new(positions, &faces, attributes)?;

    let joints = (0..bones)
        .map(|b| Joint {
            name: format!("bone{b}"),
            parent: b.checked_sub(1),
            inverse_bind: Translation3::new(0.0, 0.0, -(b as f64) * bone_len).to_homogeneous(),
        })
        .collect();
    let poses = (0..CYLINDER_FRAMES)
        .map(|f| {
            let total = FRAC_PI_2 * f as f64 / (CYLINDER_FRAMES - 1) as f64;
            let per_joint = if bones > 1 { total / (bones - 1) as f64 } else { 0.0 };
            let local = (0..bones)
                .map(|b| -> Matrix4<f64> {
                    if b == 0 {
                        Matrix4::identity()
                    } else {
                        Translation3::new(0.0, 0.0, bone_len).to_homogeneous()
                            * Rotation3::from_axis_angle(&Vec3::x_axis(), per_joint).to_homogeneous()
                    }
                })
                .collect();
            NamedPose {
                name: format!("bend_{f:03}"),
                local,
            }
        })
        .collect();
    let sidecar = SkinSidecar {
        skeleton: Skeleton { joints },
        influences,
        poses,
    };
    Ok((mesh, sidecar))
}

/// Piecewise-linear blend between the centres of neighbouring bones; `u` is
/// the position along the chain in bone lengths.
fn chain_influences(u: f64, bones: usize) -> JointInfluences {
    let c = u - 0.5;
    if c <= 0.0 {
        return JointInfluences::single(0);
    }
    let last = bones - 1;
    if c >= last as f64 {
        return JointInfluences::single(last as u32);
    }
    let k = c.floor() as usize;
    let t = c - k as f64;
    JointInfluences::new([(k as u32, 1.0 - t), (k as u32 + 1, t)]).expect("valid weights")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let m = grid(2, 1);
        assert_eq!((m.quad_count(), m.vertex_count()), (2, 6));
    }

    #[test]
    fn cube_counts_and_orientation() {
        let m = subdivided_cube(13);
        assert_eq!(m.quad_count(), 1014);
        assert_eq!(m.tri_count(), 0);
        assert_eq!(m.vertex_count(), 6 * 13 * 13 + 2);
        assert!(m.non_manifold_edges().is_empty());
        for (f, face) in m.faces() {
            let n = m.face_normal_area(f).normal.unwrap();
            let c: Vec3 = face.vertices().iter().map(|&v| m.position(v)).sum::<Vec3>() / 4.0;
            assert!(n.dot(&c) > 0.0, "face {f} points inward");
        }
        for v in 0..m.vertex_slots() as u32 {
            assert!(!m.is_boundary_vertex(v));
        }
    }

    #[test]
    fn unwelded_cube_counts() {
        let m = subdivided_cube_unwelded(13, 1.0);
        assert_eq!((m.quad_count(), m.vertex_count()), (1014, 1176));
        let boundary = m.edges().into_iter().filter(|&e| m.edge_faces(e).unwrap().len() == 1).count();
        assert_eq!(boundary, 6 * 4 * 13);
    }

    #[test]
    fn cube_is_deterministic() {
        let (a, b) = (subdivided_cube(4), subdivided_cube(4));
        assert_eq!(a.positions(), b.positions());
        assert!(a.faces().zip(b.faces()).all(|(x, y)| x == y));
    }

    #[test]
    fn cylinder_influences() {
        let (m, skin) = skinned_cylinder(16, 8, 2).unwrap();
        assert_eq!(m.quad_count(), 128);
        for inf in m.attributes().joints.as_ref().unwrap() {
            assert!(inf.len() <= 2);
            assert!((inf.sum() - 1.0).abs() < 1e-12);
        }
        assert_eq!(skin.poses.len(), CYLINDER_FRAMES);
        assert_eq!(skin.skeleton.joints.len(), 2);
    }

    #[test]
    fn cylinder_bend_reaches_ninety_degrees() {
        let (m, skin) = skinned_cylinder(8, 8, 2).unwrap();
        let poses = skin.skinning_poses().unwrap();
        let rest = crate::attributes::lbs_pose(&m, &poses[0]).unwrap();
        for (a, b) in rest.iter().zip(m.positions()) {
            assert!((a - b).norm() < 1e-12);
        }
        let bent = crate::attributes::lbs_pose(&m, poses.last().unwrap()).unwrap();
        // The tip ring is driven only by the second bone and rotates 90°
        // about the joint at z = 2.
        let tip = m.vertex_slots() - 8;
        let p = m.position(tip as u32);
        let expect = Vec3::new(p.x, -(p.z - 2.0), 2.0 + p.y);
        assert!((bent[tip] - expect).norm() < 1e-12);
    }

    #[test]
    fn invalid_cylinder_params() {
        assert!(matches!(skinned_cylinder(2, 1, 1), Err(Error::SynthParams(_))));
    }
}
