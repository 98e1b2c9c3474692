//! Hybrid triangle/quad mesh stored as an indexed face list with derived
//! edge and vertex adjacency, plus the topological edge-collapse operator.
//!
//! Faces and vertices are never renumbered while a mesh is being decimated;
//! removed elements are tombstoned and dropped by [`Mesh::compact`].

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::attributes::{VertexAttributeValues, VertexAttributes};
use crate::{Error, Result, Vec3};

pub type VertexId = u32;
pub type FaceId = u32;

/// Unordered vertex pair in canonical `lo < hi` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct EdgeKey {
    lo: VertexId,
    hi: VertexId,
}

impl EdgeKey {
    /// Returns `None` for a degenerate pair (`a == b`).
    pub fn new(a: VertexId, b: VertexId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Self { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Self { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(self) -> VertexId {
        self.lo
    }

    pub fn hi(self) -> VertexId {
        self.hi
    }

    pub fn contains(self, v: VertexId) -> bool {
        self.lo == v || self.hi == v
    }

    pub fn other(self, v: VertexId) -> VertexId {
        if self.lo == v {
            self.hi
        } else {
            self.lo
        }
    }
}

/// A triangle or quad. Vertex order defines orientation (counter-clockwise
/// around the outward normal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    verts: [VertexId; 4],
    arity: u8,
}

impl Face {
    pub fn tri(a: VertexId, b: VertexId, c: VertexId) -> Self {
        Self {
            verts: [a, b, c, VertexId::MAX],
            arity: 3,
        }
    }

    pub fn quad(a: VertexId, b: VertexId, c: VertexId, d: VertexId) -> Self {
        Self {
            verts: [a, b, c, d],
            arity: 4,
        }
    }

    fn from_slice(v: &[VertexId]) -> Option<Self> {
        match *v {
            [a, b, c] => Some(Self::tri(a, b, c)),
            [a, b, c, d] => Some(Self::quad(a, b, c, d)),
            _ => None,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.verts[..self.arity as usize]
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn is_quad(&self) -> bool {
        self.arity == 4
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices().contains(&v)
    }

    /// Boundary edges of the polygon in cyclic order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        let vs = self.vertices();
        (0..vs.len()).filter_map(move |i| EdgeKey::new(vs[i], vs[(i + 1) % vs.len()]))
    }

    /// Whether `a` and `b` are consecutive corners of this face.
    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        let vs = self.vertices();
        let n = vs.len();
        (0..n).any(|i| {
            let (x, y) = (vs[i], vs[(i + 1) % n]);
            (x == a && y == b) || (x == b && y == a)
        })
    }

    /// For a quad containing `edge`, the edge sharing no vertex with it.
    pub fn opposing_edge(&self, edge: EdgeKey) -> Option<EdgeKey> {
        if !self.is_quad() {
            return None;
        }
        let v = self.verts;
        (0..4).find_map(|i| {
            let here = EdgeKey::new(v[i], v[(i + 1) % 4])?;
            if here == edge {
                EdgeKey::new(v[(i + 2) % 4], v[(i + 3) % 4])
            } else {
                None
            }
        })
    }

    /// Replace `from` with `to` and drop consecutive duplicates. Returns
    /// `None` if fewer than three distinct corners remain.
    fn retargeted(&self, from: VertexId, to: VertexId) -> Option<Self> {
        let mut out: SmallVec<[VertexId; 4]> = self
            .vertices()
            .iter()
            .map(|&v| if v == from { to } else { v })
            .collect();
        out.dedup();
        while out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        Face::from_slice(&out)
    }

    fn sorted_key(&self) -> [VertexId; 4] {
        let mut k = self.verts;
        k[..self.arity()].sort_unstable();
        k
    }
}

/// Unit normal (when defined) and area of a polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    /// `None` for a degenerate (zero-area) polygon.
    pub normal: Option<Vec3>,
    pub area: f64,
}

/// Newell normal and fan-triangulated area of a planar or non-planar polygon.
pub fn polygon_normal_area(points: &[Vec3]) -> FaceGeometry {
    let n = points.len();
    let mut newell = Vec3::zeros();
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        newell.x += (p.y - q.y) * (p.z + q.z);
        newell.y += (p.z - q.z) * (p.x + q.x);
        newell.z += (p.x - q.x) * (p.y + q.y);
    }
    let mut area = 0.0;
    let mut scale: f64 = 0.0;
    for i in 1..n.saturating_sub(1) {
        let e1 = points[i] - points[0];
        let e2 = points[i + 1] - points[0];
        area += 0.5 * e1.cross(&e2).norm();
        scale = scale.max(e1.norm_squared()).max(e2.norm_squared());
    }
    let len = newell.norm();
    if !(len > 1e-14 * scale) || !(area > 0.0) {
        return FaceGeometry {
            normal: None,
            area: 0.0,
        };
    }
    FaceGeometry {
        normal: Some(newell / len),
        area,
    }
}

/// 2·quads + triangles: the size of the mesh after triangulation.
pub fn total_triangle_count(quads: usize, tris: usize) -> usize {
    2 * quads + tris
}

/// Result of [`Mesh::collapse_edge`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseOutcome {
    pub removed_faces: Vec<FaceId>,
    /// Quads that became triangles.
    pub retargeted_faces: Vec<FaceId>,
    pub surviving_vertex: VertexId,
    pub removed_vertex: VertexId,
}

type FaceList = SmallVec<[FaceId; 2]>;

#[derive(Debug, Clone)]
pub struct Mesh {
    positions: Vec<Vec3>,
    faces: Vec<Face>,
    face_alive: Vec<bool>,
    vertex_alive: Vec<bool>,
    attributes: VertexAttributes,
    edge_map: HashMap<EdgeKey, FaceList>,
    vertex_faces: Vec<SmallVec<[FaceId; 8]>>,
    quads: usize,
    tris: usize,
}

impl Mesh {
    /// Validates the face list and builds adjacency. Non-manifold edges are
    /// allowed; see [`Mesh::non_manifold_edges`].
    pub fn new(
        positions: Vec<Vec3>,
        faces: &[Vec<VertexId>],
        attributes: VertexAttributes,
    ) -> Result<Self> {
        let n = positions.len();
        let mut built = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&v| v as usize >= n) {
                return Err(Error::IndexOutOfRange {
                    face: fi,
                    index: bad as usize,
                    vertex_count: n,
                });
            }
            let face = Face::from_slice(f).ok_or(Error::BadArity {
                face: fi,
                arity: f.len(),
            })?;
            let vs = face.vertices();
            for i in 0..vs.len() {
                if vs[i + 1..].contains(&vs[i]) {
                    return Err(Error::RepeatedVertex {
                        face: fi,
                        vertex: vs[i] as usize,
                    });
                }
            }
            built.push(face);
        }
        attributes.check_len(n)?;

        let mut mesh = Mesh {
            face_alive: vec![true; built.len()],
            vertex_alive: vec![true; n],
            vertex_faces: vec![SmallVec::new(); n],
            edge_map: HashMap::new(),
            quads: built.iter().filter(|f| f.is_quad()).count(),
            tris: built.iter().filter(|f| !f.is_quad()).count(),
            faces: built,
            positions,
            attributes,
        };
        mesh.edge_map = mesh.rebuild_edge_map();
        for (fi, f) in mesh.faces.iter().enumerate() {
            for &v in f.vertices() {
                mesh.vertex_faces[v as usize].push(fi as FaceId);
            }
        }
        Ok(mesh)
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), &[], VertexAttributes::default()).expect("empty mesh is valid")
    }

    /// Number of vertex slots, including removed vertices.
    pub fn vertex_slots(&self) -> usize {
        self.positions.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_alive.iter().filter(|&&a| a).count()
    }

    pub fn is_vertex_alive(&self, v: VertexId) -> bool {
        self.vertex_alive[v as usize]
    }

    pub fn position(&self, v: VertexId) -> Vec3 {
        self.positions[v as usize]
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn attributes(&self) -> &VertexAttributes {
        &self.attributes
    }

    pub fn attributes_mut(&mut self) -> &mut VertexAttributes {
        &mut self.attributes
    }

    /// Replace vertex positions wholesale (used for posing).
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Self {
        assert_eq!(positions.len(), self.positions.len());
        Self {
            positions,
            ..self.clone()
        }
    }

    pub fn face(&self, f: FaceId) -> Option<&Face> {
        self.face_alive
            .get(f as usize)
            .copied()
            .unwrap_or(false)
            .then(|| &self.faces[f as usize])
    }

    /// Live faces in id order.
    pub fn faces(&self) -> impl Iterator<Item = (FaceId, &Face)> + '_ {
        self.faces
            .iter()
            .enumerate()
            .filter(|(i, _)| self.face_alive[*i])
            .map(|(i, f)| (i as FaceId, f))
    }

    pub fn face_count(&self) -> usize {
        self.quads + self.tris
    }

    pub fn quad_count(&self) -> usize {
        self.quads
    }

    pub fn tri_count(&self) -> usize {
        self.tris
    }

    pub fn total_triangle_count(&self) -> usize {
        total_triangle_count(self.quads, self.tris)
    }

    pub fn is_empty(&self) -> bool {
        self.face_count() == 0
    }

    pub fn vertex_faces(&self, v: VertexId) -> &[FaceId] {
        &self.vertex_faces[v as usize]
    }

    /// Faces incident to an edge, or `None` if the edge does not exist.
    pub fn edge_faces(&self, edge: EdgeKey) -> Option<&[FaceId]> {
        self.edge_map.get(&edge).map(|f| f.as_slice())
    }

    pub fn has_edge(&self, edge: EdgeKey) -> bool {
        self.edge_map.contains_key(&edge)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_map.len()
    }

    /// All unique edges in sorted order.
    pub fn edges(&self) -> Vec<EdgeKey> {
        let mut e: Vec<EdgeKey> = self.edge_map.keys().copied().collect();
        e.sort_unstable();
        e
    }

    /// Edges without exactly two incident faces, sorted.
    pub fn non_manifold_edges(&self) -> Vec<EdgeKey> {
        let mut e: Vec<EdgeKey> = self
            .edge_map
            .iter()
            .filter(|(_, f)| f.len() != 2)
            .map(|(k, _)| *k)
            .collect();
        e.sort_unstable();
        e
    }

    pub fn is_boundary_vertex(&self, v: VertexId) -> bool {
        self.vertex_faces[v as usize].iter().any(|&f| {
            let face = &self.faces[f as usize];
            face.edges()
                .filter(|e| e.contains(v))
                .any(|e| self.edge_map.get(&e).map_or(0, |l| l.len()) == 1)
        })
    }

    /// Vertices sharing an edge with `v`, sorted.
    pub fn neighbors(&self, v: VertexId) -> SmallVec<[VertexId; 12]> {
        let mut out: SmallVec<[VertexId; 12]> = SmallVec::new();
        for &f in &self.vertex_faces[v as usize] {
            let vs = self.faces[f as usize].vertices();
            let n = vs.len();
            if let Some(i) = vs.iter().position(|&x| x == v) {
                out.push(vs[(i + 1) % n]);
                out.push(vs[(i + n - 1) % n]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Edges incident to `v`, sorted.
    pub fn vertex_edges(&self, v: VertexId) -> SmallVec<[EdgeKey; 12]> {
        self.neighbors(v)
            .into_iter()
            .filter_map(|n| EdgeKey::new(v, n))
            .collect()
    }

    pub fn face_normal_area(&self, f: FaceId) -> FaceGeometry {
        let pts: SmallVec<[Vec3; 4]> = self.faces[f as usize]
            .vertices()
            .iter()
            .map(|&v| self.positions[v as usize])
            .collect();
        polygon_normal_area(&pts)
    }

    /// For every incident quad `[a, b, c, d]` containing the edge `(a, b)`,
    /// the edge `(c, d)`. Triangles contribute nothing.
    pub fn opposing_edges(&self, edge: EdgeKey) -> Result<SmallVec<[EdgeKey; 2]>> {
        let faces = self.edge_faces(edge).ok_or(Error::UnknownEdge(edge))?;
        Ok(faces
            .iter()
            .filter_map(|&f| self.faces[f as usize].opposing_edge(edge))
            .collect())
    }

    /// Topological and geometric validity of collapsing `edge` with the
    /// merged vertex placed at `new_position`:
    ///
    /// * every vertex adjacent to both endpoints lies on a face of the edge;
    /// * no quad holds the endpoints as a diagonal;
    /// * no surviving face reverses or degenerates;
    /// * no two surviving faces coincide and no vertex is left without faces.
    pub fn collapse_is_valid(&self, edge: EdgeKey, new_position: Vec3) -> bool {
        let Some(edge_faces) = self.edge_map.get(&edge) else {
            return false;
        };
        let (a, b) = (edge.lo, edge.hi);

        // Link condition.
        let na = self.neighbors(a);
        let nb = self.neighbors(b);
        for x in na.iter().filter(|x| nb.binary_search(x).is_ok()) {
            let on_edge_face = edge_faces
                .iter()
                .any(|&f| self.faces[f as usize].contains(*x));
            if !on_edge_face {
                return false;
            }
        }

        let mut touched: SmallVec<[FaceId; 16]> = self.vertex_faces[a as usize]
            .iter()
            .chain(self.vertex_faces[b as usize].iter())
            .copied()
            .collect();
        touched.sort_unstable();
        touched.dedup();

        let pos = |v: VertexId| {
            if v == a {
                new_position
            } else {
                self.positions[v as usize]
            }
        };
        let mut removed: SmallVec<[FaceId; 4]> = SmallVec::new();
        let mut keys: SmallVec<[[VertexId; 4]; 16]> = SmallVec::new();
        for &f in &touched {
            let face = &self.faces[f as usize];
            if face.contains(a) && face.contains(b) && !face.has_edge(a, b) {
                return false;
            }
            match face.retargeted(b, a) {
                None => removed.push(f),
                Some(after) => {
                    let before = self.face_normal_area(f);
                    if let Some(n0) = before.normal {
                        let pts: SmallVec<[Vec3; 4]> =
                            after.vertices().iter().map(|&v| pos(v)).collect();
                        match polygon_normal_area(&pts).normal {
                            Some(n1) if n0.dot(&n1) > 0.0 => {}
                            _ => return false,
                        }
                    }
                    keys.push(after.sorted_key());
                }
            }
        }
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        for &f in &removed {
            for &x in self.faces[f as usize].vertices() {
                if x == a || x == b {
                    continue;
                }
                let keeps_face = self.vertex_faces[x as usize]
                    .iter()
                    .any(|g| !removed.contains(g));
                if !keeps_face {
                    return false;
                }
            }
        }
        true
    }

    /// Merge the edge's endpoints into the lower-id vertex at
    /// `new_position`. Triangles on the edge are removed, quads on the edge
    /// become triangles.
    pub fn collapse_edge(
        &mut self,
        edge: EdgeKey,
        new_position: Vec3,
        merged: &VertexAttributeValues,
    ) -> Result<CollapseOutcome> {
        if !self.collapse_is_valid(edge, new_position) {
            return Err(Error::InvalidCollapse(edge));
        }
        Ok(self.collapse_unchecked(edge, new_position, merged))
    }

    pub(crate) fn collapse_unchecked(
        &mut self,
        edge: EdgeKey,
        new_position: Vec3,
        merged: &VertexAttributeValues,
    ) -> CollapseOutcome {
        let (keep, gone) = (edge.lo, edge.hi);
        let mut touched: Vec<FaceId> = self.vertex_faces[keep as usize]
            .iter()
            .chain(self.vertex_faces[gone as usize].iter())
            .copied()
            .collect();
        touched.sort_unstable();
        touched.dedup();

        for &f in &touched {
            let face = self.faces[f as usize];
            for e in face.edges() {
                self.unlink_edge(e, f);
            }
        }

        let mut removed_faces = Vec::new();
        let mut retargeted_faces = Vec::new();
        for &f in &touched {
            let face = self.faces[f as usize];
            match face.retargeted(gone, keep) {
                None => {
                    removed_faces.push(f);
                    self.face_alive[f as usize] = false;
                    if face.is_quad() {
                        self.quads -= 1;
                    } else {
                        self.tris -= 1;
                    }
                    for &v in face.vertices() {
                        if v != keep && v != gone {
                            self.vertex_faces[v as usize].retain(|g| *g != f);
                        }
                    }
                }
                Some(after) => {
                    if face.is_quad() && !after.is_quad() {
                        retargeted_faces.push(f);
                        self.quads -= 1;
                        self.tris += 1;
                    }
                    self.faces[f as usize] = after;
                    for e in after.edges() {
                        self.edge_map.entry(e).or_default().push(f);
                    }
                }
            }
        }

        let mut merged_faces: SmallVec<[FaceId; 8]> = touched
            .iter()
            .copied()
            .filter(|f| self.face_alive[*f as usize])
            .collect();
        merged_faces.sort_unstable();
        self.vertex_faces[keep as usize] = merged_faces;
        self.vertex_faces[gone as usize].clear();
        self.vertex_alive[gone as usize] = false;
        self.positions[keep as usize] = new_position;
        self.attributes.set(keep as usize, merged);

        for &f in &touched {
            if !self.face_alive[f as usize] {
                continue;
            }
            let face = self.faces[f as usize];
            for e in face.edges() {
                if let Some(list) = self.edge_map.get_mut(&e) {
                    list.sort_unstable();
                }
            }
        }

        CollapseOutcome {
            removed_faces,
            retargeted_faces,
            surviving_vertex: keep,
            removed_vertex: gone,
        }
    }

    fn unlink_edge(&mut self, e: EdgeKey, f: FaceId) {
        if let Some(list) = self.edge_map.get_mut(&e) {
            if let Some(i) = list.iter().position(|&g| g == f) {
                list.remove(i);
            }
            if list.is_empty() {
                self.edge_map.remove(&e);
            }
        }
    }

    /// Edge-to-face map computed from scratch from the live faces.
    pub fn rebuild_edge_map(&self) -> HashMap<EdgeKey, FaceList> {
        let mut map: HashMap<EdgeKey, FaceList> = HashMap::new();
        for (fi, f) in self.faces() {
            for e in f.edges() {
                map.entry(e).or_default().push(fi);
            }
        }
        map
    }

    /// Whether the incrementally maintained adjacency matches a rebuild.
    pub fn adjacency_consistent(&self) -> bool {
        let rebuilt = self.rebuild_edge_map();
        if rebuilt.len() != self.edge_map.len() {
            return false;
        }
        let edges_ok = rebuilt.iter().all(|(k, v)| {
            self.edge_map.get(k).is_some_and(|mine| {
                let mut a = mine.clone();
                a.sort_unstable();
                a == *v
            })
        });
        let verts_ok = (0..self.positions.len()).all(|v| {
            let mut expect: Vec<FaceId> = self
                .faces()
                .filter(|(_, f)| f.contains(v as VertexId))
                .map(|(i, _)| i)
                .collect();
            expect.sort_unstable();
            let mut have = self.vertex_faces[v].to_vec();
            have.sort_unstable();
            have == expect
        });
        edges_ok && verts_ok
    }

    /// Copy with removed faces and unreferenced vertices dropped. Relative
    /// order of the remaining faces and vertices is preserved.
    pub fn compact(&self) -> Mesh {
        let mut remap = vec![VertexId::MAX; self.positions.len()];
        let mut used = vec![false; self.positions.len()];
        for (_, f) in self.faces() {
            for &v in f.vertices() {
                used[v as usize] = true;
            }
        }
        let mut keep = Vec::new();
        for (v, &u) in used.iter().enumerate() {
            if u {
                remap[v] = keep.len() as VertexId;
                keep.push(v);
            }
        }
        let positions = keep.iter().map(|&v| self.positions[v]).collect();
        let faces: Vec<Vec<VertexId>> = self
            .faces()
            .map(|(_, f)| f.vertices().iter().map(|&v| remap[v as usize]).collect())
            .collect();
        let attributes = self.attributes.select(&keep);
        Mesh::new(positions, &faces, attributes).expect("compaction preserves validity")
    }

    /// Axis-aligned bounds of the referenced vertices.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let mut it = self
            .faces()
            .flat_map(|(_, f)| f.vertices().iter().copied())
            .map(|v| self.positions[v as usize]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.inf(&p), hi.sup(&p))))
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        self.bounding_box().map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn mesh(pos: Vec<Vec3>, faces: &[Vec<u32>]) -> Mesh {
        Mesh::new(pos, faces, VertexAttributes::default()).unwrap()
    }

    /// `w`×`h` unit quads in the z = 0 plane.
    fn quad_grid(w: u32, h: u32) -> Mesh {
        let mut pos = Vec::new();
        for j in 0..=h {
            for i in 0..=w {
                pos.push(v(i as f64, j as f64, 0.0));
            }
        }
        let id = |i: u32, j: u32| j * (w + 1) + i;
        let mut faces = Vec::new();
        for j in 0..h {
            for i in 0..w {
                faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        mesh(pos, &faces)
    }

    fn e(a: u32, b: u32) -> EdgeKey {
        EdgeKey::new(a, b).unwrap()
    }

    #[test]
    fn edge_key_is_canonical() {
        assert_eq!(EdgeKey::new(5, 2), EdgeKey::new(2, 5));
        assert_eq!(EdgeKey::new(3, 3), None);
        let k = e(9, 4);
        assert_eq!((k.lo(), k.hi()), (4, 9));
        assert_eq!(k.other(4), 9);
    }

    #[test]
    fn single_quad_has_four_boundary_edges() {
        let m = quad_grid(1, 1);
        assert_eq!(m.edge_count(), 4);
        for k in m.edges() {
            assert_eq!(m.edge_faces(k).unwrap().len(), 1);
        }
    }

    #[test]
    fn shared_edge_has_two_faces() {
        let m = mesh(
            vec![v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(1., 1., 0.)],
            &[vec![0, 1, 2], vec![2, 1, 3]],
        );
        assert_eq!(m.edge_faces(e(1, 2)).unwrap(), &[0, 1]);
        assert_eq!(m.edge_count(), 5);
    }

    #[test]
    fn fan_of_three_is_non_manifold() {
        let m = mesh(
            vec![
                v(0., 0., 0.),
                v(1., 0., 0.),
                v(0., 1., 0.),
                v(0., -1., 0.),
                v(0., 0., 1.),
            ],
            &[vec![0, 1, 2], vec![1, 0, 3], vec![0, 1, 4]],
        );
        assert_eq!(m.non_manifold_edges().len(), 7);
        assert_eq!(m.edge_faces(e(0, 1)).unwrap().len(), 3);
    }

    #[test]
    fn build_rejects_bad_faces() {
        let pos = vec![v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.)];
        let attrs = VertexAttributes::default;
        assert!(matches!(
            Mesh::new(pos.clone(), &[vec![0, 1, 7]], attrs()),
            Err(Error::IndexOutOfRange { index: 7, .. })
        ));
        assert!(matches!(
            Mesh::new(pos.clone(), &[vec![0, 1]], attrs()),
            Err(Error::BadArity { arity: 2, .. })
        ));
        assert!(matches!(
            Mesh::new(pos.clone(), &[vec![0, 1, 2, 0, 1]], attrs()),
            Err(Error::BadArity { arity: 5, .. })
        ));
        assert!(matches!(
            Mesh::new(pos, &[vec![0, 1, 1]], attrs()),
            Err(Error::RepeatedVertex { vertex: 1, .. })
        ));
    }

    #[test]
    fn unit_square_normal_and_area() {
        let g = polygon_normal_area(&[
            v(0., 0., 0.),
            v(1., 0., 0.),
            v(1., 1., 0.),
            v(0., 1., 0.),
        ]);
        assert!((g.normal.unwrap() - v(0., 0., 1.)).norm() < 1e-15);
        assert!((g.area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn right_triangle_normal_and_area() {
        let g = polygon_normal_area(&[v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.)]);
        assert!((g.normal.unwrap() - v(0., 0., 1.)).norm() < 1e-15);
        assert!((g.area - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_planar_quad_matches_fan_triangulation() {
        let eps = 0.3;
        let p = [v(0., 0., 0.), v(1., 0., 0.), v(1., 1., eps), v(0., 1., 0.)];
        let g = polygon_normal_area(&p);
        // Oracle: the two fan triangles, summed.
        let t1 = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let t2 = (p[2] - p[0]).cross(&(p[3] - p[0]));
        assert!((g.area - 0.5 * (t1.norm() + t2.norm())).abs() < 1e-14);
        // Newell for this quad is (-eps/2, -eps/2, 1) up to scale.
        let expect = v(-eps / 2.0, -eps / 2.0, 1.0).normalize();
        assert!((g.normal.unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn degenerate_face_has_no_normal() {
        let g = polygon_normal_area(&[v(0., 0., 0.), v(1., 0., 0.), v(2., 0., 0.)]);
        assert_eq!(g.normal, None);
        assert_eq!(g.area, 0.0);
    }

    #[test]
    fn opposing_edges_of_quad() {
        let m = quad_grid(1, 1); // quad [0, 1, 3, 2]
        assert_eq!(m.opposing_edges(e(0, 1)).unwrap().as_slice(), &[e(3, 2)]);
        assert_eq!(m.opposing_edges(e(1, 3)).unwrap().as_slice(), &[e(2, 0)]);
        assert!(matches!(
            m.opposing_edges(e(0, 3)),
            Err(Error::UnknownEdge(_))
        ));
    }

    #[test]
    fn opposing_edges_skip_triangles() {
        let m = mesh(
            vec![
                v(0., 0., 0.),
                v(1., 0., 0.),
                v(1., 1., 0.),
                v(0., 1., 0.),
                v(0.5, -1., 0.),
            ],
            &[vec![0, 1, 2, 3], vec![1, 0, 4]],
        );
        assert_eq!(m.opposing_edges(e(0, 1)).unwrap().as_slice(), &[e(2, 3)]);
    }

    #[test]
    fn opposing_edges_are_symmetric() {
        let m = quad_grid(3, 2);
        for k in m.edges() {
            for o in m.opposing_edges(k).unwrap() {
                assert!(m.opposing_edges(o).unwrap().contains(&k));
            }
        }
    }

    #[test]
    fn interior_grid_edge_is_collapsible() {
        let m = quad_grid(4, 4);
        // vertices 6 = (1,1) and 7 = (2,1)
        let k = e(6, 7);
        let mid = (m.position(6) + m.position(7)) / 2.0;
        assert!(m.collapse_is_valid(k, mid));
    }

    #[test]
    fn fold_over_is_rejected() {
        let m = quad_grid(4, 4);
        // Placing the merged vertex far outside its one-ring flips faces.
        let k = e(6, 7);
        let far = v(-5.0, 1.0, 0.0);
        assert!(!m.collapse_is_valid(k, far));
        // Oracle: at least one surviving face of either endpoint reverses.
        let flipped = m.vertex_faces(6).iter().chain(m.vertex_faces(7)).any(|&f| {
            let face = m.face(f).unwrap();
            if face.contains(6) && face.contains(7) {
                return false;
            }
            let pts: Vec<Vec3> = face
                .vertices()
                .iter()
                .map(|&x| if x == 6 || x == 7 { far } else { m.position(x) })
                .collect();
            polygon_normal_area(&pts).normal.unwrap().z < 0.0
        });
        assert!(flipped);
    }

    #[test]
    fn pillow_and_closed_tetrahedron_are_rejected() {
        let pos = vec![v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(0.3, 0.3, 1.)];
        let pillow = mesh(pos[..3].to_vec(), &[vec![0, 1, 2], vec![0, 2, 1]]);
        for k in pillow.edges() {
            let mid = (pillow.position(k.lo()) + pillow.position(k.hi())) / 2.0;
            assert!(!pillow.collapse_is_valid(k, mid), "{k:?}");
        }
        let tet = mesh(
            pos,
            &[vec![0, 2, 1], vec![0, 1, 3], vec![1, 2, 3], vec![2, 0, 3]],
        );
        for k in tet.edges() {
            let mid = (tet.position(k.lo()) + tet.position(k.hi())) / 2.0;
            assert!(!tet.collapse_is_valid(k, mid), "{k:?}");
        }
    }

    #[test]
    fn collapse_between_two_quads_makes_two_triangles() {
        // 2x1 strip: [0,1,4,3], [1,2,5,4]; shared edge (1,4).
        let mut m = quad_grid(2, 1);
        let k = e(1, 4);
        let mid = (m.position(1) + m.position(4)) / 2.0;
        let out = m
            .collapse_edge(k, mid, &VertexAttributeValues::default())
            .unwrap();
        assert_eq!(out.retargeted_faces, vec![0, 1]);
        assert!(out.removed_faces.is_empty());
        assert_eq!((m.quad_count(), m.tri_count()), (0, 2));
        assert_eq!((out.surviving_vertex, out.removed_vertex), (1, 4));
        assert!(m.faces().all(|(_, f)| !f.contains(4)));
        assert!(m.adjacency_consistent());
    }

    #[test]
    fn collapse_removes_triangle() {
        let mut m = mesh(
            vec![v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(1., 1., 0.)],
            &[vec![0, 1, 2], vec![2, 1, 3]],
        );
        let k = e(0, 1);
        let out = m
            .collapse_edge(k, v(0.5, 0., 0.), &VertexAttributeValues::default())
            .unwrap();
        assert_eq!(out.removed_faces, vec![0]);
        assert_eq!(m.face_count(), 1);
        assert!(m.adjacency_consistent());
    }

    #[test]
    fn chord_collapse_removes_a_quad() {
        // Collapse edge (1,4) then its opposing edge in the old quad.
        let mut m = quad_grid(2, 1);
        let before = m.total_triangle_count();
        let k = e(1, 4);
        let opp = m.opposing_edges(k).unwrap();
        assert_eq!(opp.as_slice(), &[e(3, 0), e(2, 5)]);
        let mid = (m.position(1) + m.position(4)) / 2.0;
        m.collapse_edge(k, mid, &VertexAttributeValues::default())
            .unwrap();
        let k2 = e(0, 3);
        let mid2 = (m.position(0) + m.position(3)) / 2.0;
        m.collapse_edge(k2, mid2, &VertexAttributeValues::default())
            .unwrap();
        assert_eq!((m.quad_count(), m.tri_count()), (0, 1));
        assert!(m.total_triangle_count() < before);
        assert!(m.adjacency_consistent());
    }

    #[test]
    fn quad_grid_chord_leaves_quads_elsewhere() {
        let mut m = quad_grid(3, 3);
        // Column of transverse edges x=1..2: (1,2), (5,6), (9,10), (13,14)
        for (a, b) in [(1, 2), (5, 6), (9, 10), (13, 14)] {
            let k = e(a, b);
            let mid = (m.position(a) + m.position(b)) / 2.0;
            m.collapse_edge(k, mid, &VertexAttributeValues::default())
                .unwrap();
            assert!(m.adjacency_consistent());
        }
        assert_eq!((m.quad_count(), m.tri_count()), (6, 0));
        let c = m.compact();
        assert_eq!(c.vertex_count(), 12);
        assert_eq!(c.face_count(), 6);
    }

    #[test]
    fn triangle_count_formula() {
        assert_eq!(total_triangle_count(38467, 1751), 78685);
        assert_eq!(total_triangle_count(0, 0), 0);
        assert_eq!(total_triangle_count(1014, 0), 2028);
    }

    #[test]
    fn invalid_collapse_is_an_error() {
        let mut m = quad_grid(2, 2);
        let r = m.collapse_edge(e(4, 5), v(-9., 0., 0.), &VertexAttributeValues::default());
        assert!(matches!(r, Err(Error::InvalidCollapse(_))));
    }
}
