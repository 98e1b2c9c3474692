//! JSON skinning sidecar.
//!
//! ```json
//! {
//!   "version": "1",
//!   "joints": [{ "name": "root", "parent": null, "inverse_bind": [16 floats, row-major] }],
//!   "influences": [[[0, 1.0]], [[0, 0.5], [1, 0.5]]],
//!   "poses": [{ "name": "bend", "transforms": [[16 floats], ...] }]
//! }
//! ```
//!
//! `influences` holds one `[joint, weight]` list per mesh vertex. Pose
//! transforms are joint-local and composed down the hierarchy; a joint's
//! parent must precede it.

use std::path::Path;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::attributes::{Joint, JointInfluences, Skeleton, SkeletonPose};
use crate::mesh::Mesh;
use crate::{Error, Result};

pub const SIDECAR_VERSION: &str = "1";

/// Tolerance on per-vertex weight sums before renormalizing.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPose {
    pub name: String,
    /// Joint-local transforms, one per joint.
    pub local: Vec<Matrix4<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SkinSidecar {
    pub skeleton: Skeleton,
    pub influences: Vec<JointInfluences>,
    pub poses: Vec<NamedPose>,
}

impl SkinSidecar {
    /// Copy the influences onto `mesh` as joint attributes.
    pub fn attach(&self, mesh: &mut Mesh) -> Result<()> {
        if self.influences.len() != mesh.vertex_slots() {
            return Err(Error::SkeletonMismatch(format!(
                "sidecar has influences for {} vertices, mesh has {}",
                self.influences.len(),
                mesh.vertex_slots()
            )));
        }
        mesh.attributes_mut().joints = Some(self.influences.clone());
        Ok(())
    }

    /// Same skeleton and poses with the influences of `mesh`.
    pub fn with_influences_of(&self, mesh: &Mesh) -> Result<Self> {
        let influences = mesh
            .attributes()
            .joints
            .clone()
            .ok_or_else(|| Error::SkeletonMismatch("mesh has no joint influences".into()))?;
        Ok(Self {
            influences,
            ..self.clone()
        })
    }

    /// Skinning matrices of every pose, in order.
    pub fn skinning_poses(&self) -> Result<Vec<SkeletonPose>> {
        self.poses.iter().map(|p| self.skeleton.pose(&p.local)).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSidecar {
    version: String,
    joints: Vec<RawJoint>,
    influences: Vec<Vec<(u32, f64)>>,
    #[serde(default)]
    poses: Vec<RawPose>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    name: String,
    parent: Option<usize>,
    inverse_bind: [f64; 16],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPose {
    name: String,
    transforms: Vec<[f64; 16]>,
}

fn to_rows(m: &Matrix4<f64>) -> [f64; 16] {
    let mut out = [0.0; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[4 * r + c] = m[(r, c)];
        }
    }
    out
}

fn from_rows(a: &[f64; 16]) -> Matrix4<f64> {
    Matrix4::from_row_slice(a)
}

/// Parse sidecar JSON. Returns the sidecar and any warnings (weights that
/// had to be renormalized). `path` only labels errors.
pub fn parse_skin_sidecar(text: &str, path: &Path) -> Result<(SkinSidecar, Vec<String>)> {
    let schema = |field: String, message: String| Error::Schema {
        path: path.to_owned(),
        field,
        message,
    };
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawSidecar = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        schema(field, e.into_inner().to_string())
    })?;
    if raw.version != SIDECAR_VERSION {
        return Err(schema(
            "version".into(),
            format!("unsupported version `{}`, expected `{SIDECAR_VERSION}`", raw.version),
        ));
    }
    let joint_count = raw.joints.len();
    let mut joints = Vec::with_capacity(joint_count);
    for (i, j) in raw.joints.into_iter().enumerate() {
        if let Some(p) = j.parent {
            if p >= i {
                return Err(schema(
                    format!("joints[{i}].parent"),
                    format!("parent {p} does not precede joint {i}"),
                ));
            }
        }
        joints.push(Joint {
            name: j.name,
            parent: j.parent,
            inverse_bind: from_rows(&j.inverse_bind),
        });
    }
    let mut warnings = Vec::new();
    let mut influences = Vec::with_capacity(raw.influences.len());
    for (vertex, list) in raw.influences.into_iter().enumerate() {
        if let Some(&(joint, _)) = list.iter().find(|e| e.0 as usize >= joint_count) {
            return Err(Error::MissingJoint {
                vertex,
                joint,
                joint_count,
            });
        }
        let inf = JointInfluences::new(list)
            .map_err(|e| schema(format!("influences[{vertex}]"), e.to_string()))?;
        let sum = inf.sum();
        if !inf.is_empty() && (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            let msg = format!("vertex {vertex}: weights sum to {sum}, renormalized");
            log::warn!("{}: {msg}", path.display());
            warnings.push(msg);
            influences.push(inf.normalized());
        } else {
            influences.push(inf);
        }
    }
    let mut poses = Vec::with_capacity(raw.poses.len());
    for (i, p) in raw.poses.into_iter().enumerate() {
        if p.transforms.len() != joint_count {
            return Err(schema(
                format!("poses[{i}].transforms"),
                format!("{} transforms for {joint_count} joints", p.transforms.len()),
            ));
        }
        poses.push(NamedPose {
            name: p.name,
            local: p.transforms.iter().map(from_rows).collect(),
        });
    }
    Ok((
        SkinSidecar {
            skeleton: Skeleton { joints },
            influences,
            poses,
        },
        warnings,
    ))
}

pub fn read_skin_sidecar(path: impl AsRef<Path>) -> Result<SkinSidecar> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let (sidecar, warnings) = parse_skin_sidecar(&text, path)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(sidecar)
}

pub fn format_skin_sidecar(sidecar: &SkinSidecar) -> String {
    let raw = RawSidecar {
        version: SIDECAR_VERSION.to_owned(),
        joints: sidecar
            .skeleton
            .joints
            .iter()
            .map(|j| RawJoint {
                name: j.name.clone(),
                parent: j.parent,
                inverse_bind: to_rows(&j.inverse_bind),
            })
            .collect(),
        influences: sidecar.influences.iter().map(|i| i.entries().to_vec()).collect(),
        poses: sidecar
            .poses
            .iter()
            .map(|p| RawPose {
                name: p.name.clone(),
                transforms: p.local.iter().map(to_rows).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("sidecar serialises")
}

pub fn write_skin_sidecar(sidecar: &SkinSidecar, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_skin_sidecar(sidecar)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::synth;

    fn parse(s: &str) -> Result<(SkinSidecar, Vec<String>)> {
        parse_skin_sidecar(s, Path::new("skin.json"))
    }

    const ID: &str = "[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]";

    #[test]
    fn round_trip() {
        let (_, skin) = synth::skinned_cylinder(8, 4, 2).unwrap();
        let (back, warnings) = parse(&format_skin_sidecar(&skin)).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(back, skin);
    }

    #[test]
    fn off_sum_weights_are_renormalized() {
        let text = format!(
            r#"{{"version":"1","joints":[{{"name":"a","parent":null,"inverse_bind":{ID}}},
               {{"name":"b","parent":0,"inverse_bind":{ID}}}],
               "influences":[[[0,0.49],[1,0.49]]]}}"#
        );
        let (skin, warnings) = parse(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!((skin.influences[0].sum() - 1.0).abs() < 1e-12);
        assert_eq!(skin.influences[0].weight(0), 0.5);
    }

    #[test]
    fn unknown_joint_names_the_vertex() {
        let text = format!(
            r#"{{"version":"1","joints":[{{"name":"a","parent":null,"inverse_bind":{ID}}}],
               "influences":[[[0,1.0]],[[3,1.0]]]}}"#
        );
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, Error::MissingJoint { vertex: 1, joint: 3, .. }));
        assert!(err.to_string().contains("vertex 1"));
    }

    #[test]
    fn schema_errors_carry_field_paths() {
        let text = r#"{"version":"1","joints":[{"name":"a","parent":null,"inverse_bind":[1,2]}],"influences":[]}"#;
        match parse(text).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "joints[0].inverse_bind"),
            other => panic!("{other:?}"),
        }
        let text = r#"{"version":"2","joints":[],"influences":[]}"#;
        assert!(matches!(parse(text), Err(Error::Schema { field, .. }) if field == "version"));
    }

    #[test]
    fn parent_must_precede_child() {
        let text = format!(
            r#"{{"version":"1","joints":[{{"name":"a","parent":1,"inverse_bind":{ID}}},
               {{"name":"b","parent":null,"inverse_bind":{ID}}}],"influences":[]}}"#
        );
        assert!(matches!(parse(&text), Err(Error::Schema { field, .. }) if field == "joints[0].parent"));
    }
}
