//! Per-vertex attributes, attribute functionals, joint influences and
//! linear blend skinning.
//!
//! Every scalar attribute channel (each UV coordinate, normal component and
//! colour component, plus one channel per skinning joint) is represented on
//! each face by a linear functional `s(p) = g·p + d` fitted to the face's
//! corners. Vertex quadrics accumulate area-weighted squared functionals so
//! the attribute value and residual at any candidate position can be
//! recovered in closed form.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4};
use smallvec::SmallVec;

use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

/// Hard cap on joint functionals kept per vertex quadric.
pub const MAX_JOINT_FUNCTIONALS: usize = 16;
/// Influences kept per vertex after decimation.
pub const MAX_FINAL_INFLUENCES: usize = 4;

/// Sparse skinning weights of one vertex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointInfluences {
    entries: SmallVec<[(u32, f64); 4]>,
}

impl JointInfluences {
    /// Entries with zero weight are dropped; duplicates are summed. At most
    /// [`MAX_JOINT_FUNCTIONALS`] entries are accepted.
    pub fn new(entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut out: SmallVec<[(u32, f64); 4]> = SmallVec::new();
        for (j, w) in entries {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Config(format!("joint {j} has weight {w}")));
            }
            if w == 0.0 {
                continue;
            }
            match out.iter_mut().find(|(k, _)| *k == j) {
                Some(e) => e.1 += w,
                None => out.push((j, w)),
            }
        }
        if out.len() > MAX_JOINT_FUNCTIONALS {
            return Err(Error::Config(format!(
                "{} joint influences exceed the cap of {MAX_JOINT_FUNCTIONALS}",
                out.len()
            )));
        }
        out.sort_by_key(|e| e.0);
        Ok(Self { entries: out })
    }

    pub fn single(joint: u32) -> Self {
        Self {
            entries: smallvec::smallvec![(joint, 1.0)],
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, joint: u32) -> f64 {
        self.entries
            .iter()
            .find(|e| e.0 == joint)
            .map_or(0.0, |e| e.1)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Scale to unit sum. No-op on an empty set.
    pub fn normalized(&self) -> Self {
        let s = self.sum();
        if s <= 0.0 {
            return self.clone();
        }
        Self {
            entries: self.entries.iter().map(|&(j, w)| (j, w / s)).collect(),
        }
    }

    /// Top [`MAX_FINAL_INFLUENCES`] by weight, renormalized.
    pub fn top_normalized(&self) -> Self {
        finalize_influences(self.entries.iter().copied()).unwrap_or_default()
    }
}

/// Half the ℓ1 distance between two influence distributions, in `[0, 1]`.
pub fn joint_distance(j0: &JointInfluences, j1: &JointInfluences) -> f64 {
    let mut total = 0.0;
    for &(j, w) in j0.entries() {
        total += (w - j1.weight(j)).abs();
    }
    for &(j, w) in j1.entries() {
        if j0.weight(j) == 0.0 {
            total += w;
        }
    }
    0.5 * total
}

/// Keep the largest [`MAX_FINAL_INFLUENCES`] values (ties to the smaller
/// joint id) after clamping negatives to zero, and renormalize to unit sum.
/// If nothing is positive the four largest raw values share equal weight.
pub fn finalize_influences(values: impl IntoIterator<Item = (u32, f64)>) -> Result<JointInfluences> {
    let mut raw: Vec<(u32, f64)> = values.into_iter().collect();
    if raw.is_empty() {
        return Err(Error::NoInfluences);
    }
    raw.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    raw.truncate(MAX_FINAL_INFLUENCES);
    let clamped: Vec<(u32, f64)> = raw.iter().map(|&(j, w)| (j, w.max(0.0))).collect();
    let sum: f64 = clamped.iter().map(|e| e.1).sum();
    let mut entries: SmallVec<[(u32, f64); 4]> = if sum > 0.0 {
        clamped
            .into_iter()
            .filter(|e| e.1 > 0.0)
            .map(|(j, w)| (j, w / sum))
            .collect()
    } else {
        let n = raw.len() as f64;
        raw.iter().map(|&(j, _)| (j, 1.0 / n)).collect()
    };
    entries.sort_by_key(|e| e.0);
    Ok(JointInfluences { entries })
}

/// Per-vertex attribute arrays. Each present array has one entry per
/// vertex slot of the owning mesh.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VertexAttributes {
    pub uvs: Option<Vec<[f64; 2]>>,
    pub normals: Option<Vec<Vec3>>,
    pub colors: Option<Vec<[f64; 3]>>,
    pub joints: Option<Vec<JointInfluences>>,
}

/// Attribute values of a single vertex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VertexAttributeValues {
    pub uv: Option<[f64; 2]>,
    pub normal: Option<Vec3>,
    pub color: Option<[f64; 3]>,
    pub joints: Option<JointInfluences>,
}

impl VertexAttributes {
    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        let check = |name, len: Option<usize>| match len {
            Some(len) if len != n => Err(Error::AttributeLength {
                name,
                len,
                expected: n,
            }),
            _ => Ok(()),
        };
        check("uv", self.uvs.as_ref().map(Vec::len))?;
        check("normal", self.normals.as_ref().map(Vec::len))?;
        check("color", self.colors.as_ref().map(Vec::len))?;
        check("joints", self.joints.as_ref().map(Vec::len))
    }

    pub fn get(&self, v: usize) -> VertexAttributeValues {
        VertexAttributeValues {
            uv: self.uvs.as_ref().map(|a| a[v]),
            normal: self.normals.as_ref().map(|a| a[v]),
            color: self.colors.as_ref().map(|a| a[v]),
            joints: self.joints.as_ref().map(|a| a[v].clone()),
        }
    }

    pub(crate) fn set(&mut self, v: usize, values: &VertexAttributeValues) {
        if let (Some(a), Some(x)) = (self.uvs.as_mut(), values.uv) {
            a[v] = x;
        }
        if let (Some(a), Some(x)) = (self.normals.as_mut(), values.normal) {
            a[v] = x;
        }
        if let (Some(a), Some(x)) = (self.colors.as_mut(), values.color) {
            a[v] = x;
        }
        if let (Some(a), Some(x)) = (self.joints.as_mut(), values.joints.as_ref()) {
            a[v] = x.clone();
        }
    }

    pub(crate) fn select(&self, keep: &[usize]) -> Self {
        fn pick<T: Clone>(a: &Option<Vec<T>>, keep: &[usize]) -> Option<Vec<T>> {
            a.as_ref().map(|a| keep.iter().map(|&i| a[i].clone()).collect())
        }
        Self {
            uvs: pick(&self.uvs, keep),
            normals: pick(&self.normals, keep),
            colors: pick(&self.colors, keep),
            joints: pick(&self.joints, keep),
        }
    }

    /// Number of scalar channels fitted with functionals (joints excluded).
    pub fn channel_count(&self) -> usize {
        2 * self.uvs.is_some() as usize
            + 3 * self.normals.is_some() as usize
            + 3 * self.colors.is_some() as usize
    }

    pub(crate) fn channel_values(&self, v: usize) -> SmallVec<[f64; 8]> {
        let mut out = SmallVec::new();
        if let Some(a) = &self.uvs {
            out.extend_from_slice(&a[v]);
        }
        if let Some(a) = &self.normals {
            out.extend_from_slice(a[v].as_slice());
        }
        if let Some(a) = &self.colors {
            out.extend_from_slice(&a[v]);
        }
        out
    }

    /// Inverse of [`Self::channel_values`]; normals are renormalized.
    pub(crate) fn values_from_channels(&self, ch: &[f64]) -> VertexAttributeValues {
        let mut i = 0;
        let mut take = |n: usize| {
            let s = &ch[i..i + n];
            i += n;
            s
        };
        let uv = self.uvs.as_ref().map(|_| {
            let s = take(2);
            [s[0], s[1]]
        });
        let normal = self.normals.as_ref().map(|_| {
            let s = take(3);
            let n = Vec3::new(s[0], s[1], s[2]);
            n.try_normalize(1e-300).unwrap_or(n)
        });
        let color = self.colors.as_ref().map(|_| {
            let s = take(3);
            [s[0], s[1], s[2]]
        });
        VertexAttributeValues {
            uv,
            normal,
            color,
            joints: None,
        }
    }
}

/// Linear attribute field `s(p) = g·p + d` over one face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeFunctional {
    pub g: Vec3,
    pub d: f64,
}

impl AttributeFunctional {
    pub fn eval(&self, p: &Vec3) -> f64 {
        self.g.dot(p) + self.d
    }
}

/// Least-squares fit of per-face linear functionals, shared across channels.
///
/// The system stacks `[pᵢᵀ 1]·[g; d] = sᵢ` for every corner with the
/// constraint row `[nᵀ 0]·[g; d] = 0`, which keeps the gradient in the
/// face's tangent plane. Solved by SVD, which yields the minimum-norm
/// solution when the corners are collinear.
pub struct FunctionalFitter {
    pinv: DMatrix<f64>,
    rows: usize,
}

impl FunctionalFitter {
    pub fn new(points: &[Vec3], face_normal: &Vec3) -> Self {
        let rows = points.len() + 1;
        let mut a = DMatrix::<f64>::zeros(rows, 4);
        for (i, p) in points.iter().enumerate() {
            a[(i, 0)] = p.x;
            a[(i, 1)] = p.y;
            a[(i, 2)] = p.z;
            a[(i, 3)] = 1.0;
        }
        a[(rows - 1, 0)] = face_normal.x;
        a[(rows - 1, 1)] = face_normal.y;
        a[(rows - 1, 2)] = face_normal.z;
        let svd = a.svd(true, true);
        let max_sv = svd.singular_values.max();
        let pinv = svd
            .pseudo_inverse(max_sv * 1e-12)
            .expect("both singular vector sets were computed");
        Self { pinv, rows }
    }

    pub fn fit(&self, values: &[f64]) -> AttributeFunctional {
        assert_eq!(values.len() + 1, self.rows);
        let mut rhs = DVector::<f64>::zeros(self.rows);
        for (i, &s) in values.iter().enumerate() {
            rhs[i] = s;
        }
        let x = &self.pinv * rhs;
        AttributeFunctional {
            g: Vec3::new(x[0], x[1], x[2]),
            d: x[3],
        }
    }
}

/// Fit one functional to `values` sampled at `points`.
pub fn fit_attribute_functional(
    points: &[Vec3],
    values: &[f64],
    face_normal: &Vec3,
) -> Result<AttributeFunctional> {
    if points.len() < 3 || points.len() != values.len() {
        return Err(Error::Config(format!(
            "functional fit needs at least 3 points with one value each (got {} points, {} values)",
            points.len(),
            values.len()
        )));
    }
    let norm = face_normal.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NonUnitNormal(norm));
    }
    Ok(FunctionalFitter::new(points, face_normal).fit(values))
}

/// Area-weighted accumulation of squared functionals for one channel:
/// `Σ a (g·p + d − s)²` expanded in `p` and `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelQuadric {
    gg: Matrix3<f64>,
    gd: Vec3,
    dd: f64,
    g: Vec3,
    d: f64,
}

impl Default for ChannelQuadric {
    fn default() -> Self {
        Self {
            gg: Matrix3::zeros(),
            gd: Vec3::zeros(),
            dd: 0.0,
            g: Vec3::zeros(),
            d: 0.0,
        }
    }
}

impl ChannelQuadric {
    pub fn from_functional(f: &AttributeFunctional, area: f64) -> Self {
        Self {
            gg: f.g * f.g.transpose() * area,
            gd: f.g * (f.d * area),
            dd: f.d * f.d * area,
            g: f.g * area,
            d: f.d * area,
        }
    }

    pub fn add(&mut self, o: &Self) {
        self.gg += o.gg;
        self.gd += o.gd;
        self.dd += o.dd;
        self.g += o.g;
        self.d += o.d;
    }

    /// Optimal attribute value at `p` given the total accumulated `area`.
    pub fn value(&self, p: &Vec3, area: f64) -> f64 {
        if area <= 0.0 {
            return 0.0;
        }
        (self.g.dot(p) + self.d) / area
    }

    /// Residual of the accumulated functionals at `p` with the value chosen
    /// optimally.
    pub fn residual(&self, p: &Vec3, area: f64) -> f64 {
        if area <= 0.0 {
            return 0.0;
        }
        let lin = self.g.dot(p) + self.d;
        let r = p.dot(&(self.gg * p)) + 2.0 * self.gd.dot(p) + self.dd - lin * lin / area;
        r.max(0.0)
    }
}

/// Joint functionals of a vertex quadric, sorted by joint id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JointFunctionals {
    entries: SmallVec<[(u32, ChannelQuadric); 4]>,
}

impl JointFunctionals {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn joint_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u32, ChannelQuadric)> {
        self.entries.iter()
    }

    pub fn add_functional(&mut self, joint: u32, q: &ChannelQuadric) {
        match self.entries.binary_search_by_key(&joint, |e| e.0) {
            Ok(i) => self.entries[i].1.add(q),
            Err(i) => self.entries.insert(i, (joint, *q)),
        }
    }

    /// Functional value of every joint at `p`.
    pub fn values(&self, p: &Vec3, area: f64) -> impl Iterator<Item = (u32, f64)> + '_ {
        let p = *p;
        self.entries.iter().map(move |(j, q)| (*j, q.value(&p, area)))
    }

    pub fn residual(&self, p: &Vec3, area: f64) -> f64 {
        self.entries.iter().map(|(_, q)| q.residual(p, area)).sum()
    }

    /// Drop joints until at most `cap` remain, each time removing the one
    /// whose larger value over `p0`/`p1` is smallest (ties: larger id goes).
    pub fn enforce_cap(&mut self, cap: usize, p0: &Vec3, p1: &Vec3, area: f64) -> Vec<u32> {
        let mut dropped = Vec::new();
        while self.entries.len() > cap {
            let (idx, _) = self
                .entries
                .iter()
                .enumerate()
                .map(|(i, (j, q))| (i, (q.value(p0, area).max(q.value(p1, area)), *j)))
                .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
                .expect("non-empty");
            dropped.push(self.entries.remove(idx).0);
        }
        dropped
    }

    /// Top influences evaluated at `p`.
    pub fn finalize(&self, p: &Vec3, area: f64) -> Result<JointInfluences> {
        finalize_influences(self.values(p, area))
    }
}

/// Union of two joint functional sets (blocks with equal ids are summed),
/// capped at [`MAX_JOINT_FUNCTIONALS`] using values at the two source
/// positions. Returns the merged set and the joints dropped, in drop order.
pub fn merge_joint_functionals(
    q0: &JointFunctionals,
    q1: &JointFunctionals,
    p0: &Vec3,
    p1: &Vec3,
    merged_area: f64,
) -> (JointFunctionals, Vec<u32>) {
    let mut out = q0.clone();
    for (j, q) in &q1.entries {
        out.add_functional(*j, q);
    }
    let dropped = out.enforce_cap(MAX_JOINT_FUNCTIONALS, p0, p1, merged_area);
    (out, dropped)
}

/// Relative importance of attribute residuals against geometric error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeWeights {
    pub uv: f64,
    pub normal: f64,
    pub color: f64,
    pub joints: f64,
}

impl Default for AttributeWeights {
    fn default() -> Self {
        Self {
            uv: 1.0,
            normal: 1.0,
            color: 1.0,
            joints: 1.0,
        }
    }
}

/// Attribute part of a vertex quadric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeBlock {
    /// Total area of the faces whose functionals were accumulated.
    pub area: f64,
    pub channels: Vec<ChannelQuadric>,
    pub joints: JointFunctionals,
}

impl AttributeBlock {
    pub fn is_empty(&self) -> bool {
        self.channels.is_empty() && self.joints.is_empty()
    }

    /// Weighted attribute residual at `p`. `channel_weights` has one entry
    /// per channel.
    pub fn residual(&self, p: &Vec3, channel_weights: &[f64], joint_weight: f64) -> f64 {
        let mut r = 0.0;
        for (q, w) in self.channels.iter().zip(channel_weights) {
            if *w != 0.0 {
                r += w * q.residual(p, self.area);
            }
        }
        if joint_weight != 0.0 {
            r += joint_weight * self.joints.residual(p, self.area);
        }
        r
    }

    pub fn channel_values(&self, p: &Vec3) -> SmallVec<[f64; 8]> {
        self.channels.iter().map(|q| q.value(p, self.area)).collect()
    }

    /// Sum of two blocks; `p0`/`p1` are the positions the blocks belong to
    /// and drive the joint cap.
    pub fn merged(&self, other: &Self, p0: &Vec3, p1: &Vec3) -> Self {
        let area = self.area + other.area;
        let mut channels = self.channels.clone();
        for (a, b) in channels.iter_mut().zip(&other.channels) {
            a.add(b);
        }
        let (joints, dropped) = merge_joint_functionals(&self.joints, &other.joints, p0, p1, area);
        if !dropped.is_empty() {
            log::debug!("joint cap dropped {dropped:?}");
        }
        Self {
            area,
            channels,
            joints,
        }
    }
}

/// Joint hierarchy with bind-pose data.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub inverse_bind: Matrix4<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Skeleton {
    pub joints: Vec<Joint>,
}

/// Per-joint skinning matrices (world pose composed with inverse bind).
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonPose {
    pub matrices: Vec<Matrix4<f64>>,
}

impl SkeletonPose {
    pub fn identity(joint_count: usize) -> Self {
        Self {
            matrices: vec![Matrix4::identity(); joint_count],
        }
    }
}

impl Skeleton {
    /// Compose joint-local transforms down the hierarchy and apply the
    /// inverse bind matrices. Parents must precede their children.
    pub fn pose(&self, local: &[Matrix4<f64>]) -> Result<SkeletonPose> {
        if local.len() != self.joints.len() {
            return Err(Error::SkeletonMismatch(format!(
                "pose has {} transforms for {} joints",
                local.len(),
                self.joints.len()
            )));
        }
        let mut world: Vec<Matrix4<f64>> = Vec::with_capacity(local.len());
        for (i, joint) in self.joints.iter().enumerate() {
            let w = match joint.parent {
                Some(p) if p < i => world[p] * local[i],
                Some(p) => {
                    return Err(Error::SkeletonMismatch(format!(
                        "joint {i} has parent {p}, which does not precede it"
                    )))
                }
                None => local[i],
            };
            world.push(w);
        }
        Ok(SkeletonPose {
            matrices: world
                .iter()
                .zip(&self.joints)
                .map(|(w, j)| w * j.inverse_bind)
                .collect(),
        })
    }
}

/// Linear blend skinning: `v' = Σ wₖ Mₖ v`. Vertices with no influences
/// keep their rest position.
pub fn lbs_pose(mesh: &Mesh, pose: &SkeletonPose) -> Result<Vec<Vec3>> {
    let joints = mesh
        .attributes()
        .joints
        .as_ref()
        .ok_or_else(|| Error::SkeletonMismatch("mesh has no joint influences".into()))?;
    let n = pose.matrices.len();
    mesh.positions()
        .iter()
        .zip(joints)
        .enumerate()
        .map(|(vi, (p, inf))| {
            if inf.is_empty() {
                return Ok(*p);
            }
            let h = p.push(1.0);
            let mut acc = nalgebra::Vector4::zeros();
            for &(j, w) in inf.entries() {
                let m = pose.matrices.get(j as usize).ok_or(Error::MissingJoint {
                    vertex: vi,
                    joint: j,
                    joint_count: n,
                })?;
                acc += m * h * w;
            }
            Ok(acc.xyz())
        })
        .collect()
}
