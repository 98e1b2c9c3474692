//! Greedy edge-collapse engine with recency-ordered equivalence classes.
//!
//! Edges wait in a cost-ordered queue. When the class queue runs dry, the
//! cheapest edge opens a new class and every edge whose cost is within
//! `eps_abs` of the opening cost joins it as collapses proceed. Inside a
//! class, edges are popped by recency: collapsing an edge of a quad raises
//! the recency of the quad's opposite edge, so whole quad chords are removed
//! one after another. Vertex quadrics are never rebuilt from the current
//! mesh; instead the default cost measures only the error a collapse adds
//! on top of the endpoints' current error.

mod queue;

use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::Serialize;

pub use queue::{EdgeQueueEntry, QemEntry};

use crate::attributes::{AttributeBlock, AttributeWeights, ChannelQuadric, FunctionalFitter, VertexAttributeValues, MAX_JOINT_FUNCTIONALS};
use crate::edge_weight::{accumulate_edge_quadrics, batch_edge_weights, EdgeQuadricMode, EdgeWeightConfig, EdgeWeightMode};
use crate::mesh::{EdgeKey, Mesh, VertexId};
use crate::quadric::{collapse_cost_merged, face_quadric_at, optimal_position, CostMode, ErrorForm, Quadric, SolverThresholds};
use crate::symmetry::{all_symmetry_weights, default_delta};
use crate::{Error, Result, Vec3};

pub const DEFAULT_EPS_ABS: f64 = 5e-6;

/// Requested output size in total triangles (`2·quads + triangles`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    TotalTriangles(usize),
    /// Fraction of the input's total triangle count, in `(0, 1]`.
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecimationConfig {
    pub target: Target,
    /// Costs closer than this to a class's opening cost join the class.
    pub eps_abs: f64,
    pub lambda_sym: f64,
    pub lambda_joint: f64,
    /// Symmetry matching distance; `None` uses `1e-3` of the bbox diagonal.
    pub sym_delta: Option<f64>,
    pub recency_enabled: bool,
    pub cost_mode: CostMode,
    pub edge_weight_mode: EdgeWeightMode,
    pub edge_quadric_mode: EdgeQuadricMode,
    pub solver: SolverThresholds,
    pub attribute_weights: AttributeWeights,
    /// Recorded in reports. The engine itself has no random choices.
    pub rng_seed: u64,
    /// Verify incremental adjacency against a rebuild after every collapse.
    pub debug_checks: bool,
}

impl Default for DecimationConfig {
    fn default() -> Self {
        Self {
            target: Target::Ratio(0.5),
            eps_abs: DEFAULT_EPS_ABS,
            lambda_sym: 0.0,
            lambda_joint: 1.0,
            sym_delta: None,
            recency_enabled: true,
            cost_mode: CostMode::New,
            edge_weight_mode: EdgeWeightMode::Dihedral,
            edge_quadric_mode: EdgeQuadricMode::PerFace,
            solver: SolverThresholds::default(),
            attribute_weights: AttributeWeights::default(),
            rng_seed: 0,
            debug_checks: false,
        }
    }
}

impl DecimationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let Target::Ratio(r) = self.target {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("ratio {r} is outside (0, 1]"));
            }
        }
        if !(self.eps_abs >= 0.0 && self.eps_abs.is_finite()) {
            return bad(format!("eps_abs {} must be finite and non-negative", self.eps_abs));
        }
        for (name, x) in [("lambda_sym", self.lambda_sym), ("lambda_joint", self.lambda_joint)] {
            if !(x >= 0.0 && x.is_finite()) {
                return bad(format!("{name} {x} must be finite and non-negative"));
            }
        }
        if let Some(d) = self.sym_delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("sym_delta {d} must be positive"));
            }
        }
        Ok(())
    }

    /// Target in total triangles for an input of `total` triangles.
    pub fn target_total(&self, total: usize) -> usize {
        match self.target {
            Target::TotalTriangles(n) => n,
            Target::Ratio(r) => (r * total as f64).round() as usize,
        }
    }
}

/// `|a − b| < eps` (strict).
pub fn approx_equal(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() < eps
}

/// Which queue currently owns an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueKind {
    /// Cost-ordered queue.
    Qem,
    /// Recency-ordered equivalence-class queue.
    Class,
    /// Popped, or blocked after a failed validity check until its cost is
    /// recomputed.
    Detached,
}

#[derive(Debug, Clone)]
struct EdgeState {
    cost: f64,
    position: Vec3,
    generation: u64,
    recency: u64,
    recency_epoch: u64,
    queue: QueueKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseRecord {
    pub edge: EdgeKey,
    pub cost: f64,
    pub recency: u64,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecimationStats {
    pub input_quads: usize,
    pub input_tris: usize,
    pub input_total_triangles: usize,
    pub target_total_triangles: usize,
    pub quads: usize,
    pub tris: usize,
    pub total_triangles: usize,
    pub collapses: usize,
    pub rejected_collapses: usize,
    pub classes: usize,
    pub reached_target: bool,
    #[serde(serialize_with = "secs")]
    pub init_time: Duration,
    #[serde(serialize_with = "secs")]
    pub collapse_time: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Clone)]
pub struct DecimationResult {
    /// Compacted output mesh.
    pub mesh: Mesh,
    pub stats: DecimationStats,
    /// Every applied collapse in order.
    pub log: Vec<CollapseRecord>,
}

/// Outcome of one [`Decimator::step`].
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Collapsed(CollapseRecord),
    Rejected(EdgeKey),
    Exhausted,
}

/// Vertex quadric extended by its attribute block.
struct Extended<'a> {
    q: Quadric,
    block: Option<AttributeBlock>,
    channel_weights: &'a [f64],
    joint_weight: f64,
}

impl ErrorForm for Extended<'_> {
    fn error_at(&self, x: &Vec3) -> f64 {
        self.q.eval(x)
            + self
                .block
                .as_ref()
                .map_or(0.0, |b| b.residual(x, self.channel_weights, self.joint_weight))
    }
}

/// Engine state; see the module docs.
pub struct Decimator {
    mesh: Mesh,
    config: DecimationConfig,
    quadrics: Vec<Quadric>,
    blocks: Option<Vec<AttributeBlock>>,
    channel_weights: Vec<f64>,
    touched: Vec<bool>,
    edges: HashMap<EdgeKey, EdgeState>,
    qem: BinaryHeap<QemEntry>,
    class: BinaryHeap<EdgeQueueEntry>,
    anchor: f64,
    epoch: u64,
    generation: u64,
    log: Vec<CollapseRecord>,
    rejected: usize,
    classes: usize,
    init_time: Duration,
}

impl Decimator {
    pub fn new(mesh: Mesh, config: DecimationConfig) -> Result<Self> {
        let start = Instant::now();
        config.validate()?;
        if mesh.face_count() == 0 {
            return Err(Error::EmptyMesh);
        }
        let n = mesh.vertex_slots();
        let mut quadrics = vec![Quadric::zero(); n];
        for (f, face) in mesh.faces() {
            for &v in face.vertices() {
                quadrics[v as usize] += face_quadric_at(&mesh, f, v);
            }
        }
        let symmetry = (config.lambda_sym > 0.0 && config.edge_weight_mode == EdgeWeightMode::Dihedral).then(|| {
            let delta = config.sym_delta.unwrap_or_else(|| default_delta(&mesh));
            all_symmetry_weights(&mesh, delta)
        });
        let weight_config = EdgeWeightConfig {
            mode: config.edge_weight_mode,
            lambda_sym: config.lambda_sym,
            lambda_joint: config.lambda_joint,
        };
        for (e, w) in batch_edge_weights(&mesh, &weight_config, symmetry.as_ref()) {
            if w > 0.0 {
                accumulate_edge_quadrics(&mesh, e, w, config.edge_quadric_mode, &mut quadrics);
            }
        }
        let blocks = attribute_blocks(&mesh);
        let channel_weights = channel_weights(&mesh, &config.attribute_weights);
        let mut this = Self {
            touched: vec![false; n],
            mesh,
            config,
            quadrics,
            blocks,
            channel_weights,
            edges: HashMap::new(),
            qem: BinaryHeap::new(),
            class: BinaryHeap::new(),
            anchor: 0.0,
            epoch: 0,
            generation: 0,
            log: Vec::new(),
            rejected: 0,
            classes: 0,
            init_time: Duration::ZERO,
        };
        for e in this.mesh.edges() {
            this.requeue(e, 0);
        }
        this.init_time = start.elapsed();
        Ok(this)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn config(&self) -> &DecimationConfig {
        &self.config
    }

    pub fn quadric(&self, v: VertexId) -> &Quadric {
        &self.quadrics[v as usize]
    }

    /// Cost and placement stored for `edge` when it was last (re)computed.
    pub fn queued_cost(&self, edge: EdgeKey) -> Option<(f64, Vec3)> {
        self.edges.get(&edge).map(|s| (s.cost, s.position))
    }

    /// Cost of `edge` under `mode` evaluated against the current state.
    pub fn edge_cost(&self, edge: EdgeKey, mode: CostMode) -> Option<(f64, Vec3)> {
        self.mesh.has_edge(edge).then(|| self.evaluate(edge, mode))
    }

    pub fn recency(&self, edge: EdgeKey) -> u64 {
        self.edges.get(&edge).map_or(0, |s| self.live_recency(s))
    }

    pub fn queue_of(&self, edge: EdgeKey) -> Option<QueueKind> {
        self.edges.get(&edge).map(|s| s.queue)
    }

    /// Cost that opened the current equivalence class.
    pub fn class_anchor(&self) -> f64 {
        self.anchor
    }

    pub fn log(&self) -> &[CollapseRecord] {
        &self.log
    }

    fn live_recency(&self, s: &EdgeState) -> u64 {
        if s.recency_epoch == self.epoch {
            s.recency
        } else {
            0
        }
    }

    fn extended(&self, v: VertexId) -> Extended<'_> {
        Extended {
            q: self.quadrics[v as usize],
            block: self.blocks.as_ref().map(|b| b[v as usize].clone()),
            channel_weights: &self.channel_weights,
            joint_weight: self.config.attribute_weights.joints,
        }
    }

    fn evaluate(&self, edge: EdgeKey, mode: CostMode) -> (f64, Vec3) {
        let (a, b) = (edge.lo(), edge.hi());
        let (pa, pb) = (self.mesh.position(a), self.mesh.position(b));
        let (ea, eb) = (self.extended(a), self.extended(b));
        let q = ea.q + eb.q;
        let opt = optimal_position(&q, &pa, &pb, &self.config.solver);
        let merged = Extended {
            q,
            block: match (&ea.block, &eb.block) {
                (Some(x), Some(y)) => Some(x.merged(y, &pa, &pb)),
                _ => None,
            },
            channel_weights: &self.channel_weights,
            joint_weight: self.config.attribute_weights.joints,
        };
        let v = if merged.block.is_some() {
            let candidates = [opt, pa, pb, (pa + pb) * 0.5];
            let mut best = (merged.error_at(&candidates[0]), candidates[0]);
            for c in &candidates[1..] {
                let err = merged.error_at(c);
                if err < best.0 {
                    best = (err, *c);
                }
            }
            best.1
        } else {
            opt
        };
        (collapse_cost_merged(&merged, &ea, &eb, &pa, &pb, &v, mode), v)
    }

    /// Recompute `edge` and place it in the cost queue with `recency`.
    fn requeue(&mut self, edge: EdgeKey, recency: u64) {
        let (cost, position) = self.evaluate(edge, self.config.cost_mode);
        self.generation += 1;
        let state = EdgeState {
            cost,
            position,
            generation: self.generation,
            recency,
            recency_epoch: self.epoch,
            queue: QueueKind::Qem,
        };
        self.edges.insert(edge, state);
        self.qem.push(QemEntry {
            cost,
            edge,
            generation: self.generation,
        });
    }

    fn move_to_class(&mut self, edge: EdgeKey) {
        self.generation += 1;
        let recency = self.recency(edge);
        let s = self.edges.get_mut(&edge).expect("queued edge has state");
        s.generation = self.generation;
        s.queue = QueueKind::Class;
        self.class.push(EdgeQueueEntry {
            edge,
            cost: s.cost,
            recency,
            generation: self.generation,
        });
    }

    fn is_live(&self, edge: EdgeKey, generation: u64, queue: QueueKind) -> bool {
        self.edges
            .get(&edge)
            .is_some_and(|s| s.generation == generation && s.queue == queue)
    }

    fn pop_live_qem(&mut self) -> Option<QemEntry> {
        while let Some(top) = self.qem.pop() {
            if self.is_live(top.edge, top.generation, QueueKind::Qem) {
                return Some(top);
            }
        }
        None
    }

    /// Next edge to collapse: the top of the class queue, opening a new
    /// class from the cost queue when the class queue is empty. `None` when
    /// both queues are exhausted.
    pub fn pop_next_edge(&mut self) -> Option<EdgeKey> {
        loop {
            while let Some(top) = self.class.pop() {
                if self.is_live(top.edge, top.generation, QueueKind::Class) {
                    self.edges.get_mut(&top.edge).expect("live").queue = QueueKind::Detached;
                    return Some(top.edge);
                }
            }
            let opener = self.pop_live_qem()?;
            // A new epoch resets every recency to zero.
            self.epoch += 1;
            self.classes += 1;
            self.anchor = opener.cost;
            self.move_to_class(opener.edge);
        }
    }

    /// Move cost-queue tops approximately equal to the class anchor into the
    /// class queue.
    fn drain_equivalent(&mut self) {
        while let Some(top) = self.qem.peek().copied() {
            if !self.is_live(top.edge, top.generation, QueueKind::Qem) {
                self.qem.pop();
                continue;
            }
            if !approx_equal(top.cost, self.anchor, self.config.eps_abs) {
                break;
            }
            self.qem.pop();
            self.move_to_class(top.edge);
        }
    }

    /// Collapse a popped edge at its stored placement and update costs,
    /// recencies and queues. A collapse that fails validation blocks the
    /// edge until a neighbouring collapse recomputes it.
    pub fn collapse(&mut self, edge: EdgeKey) -> Result<CollapseRecord> {
        let state = self.edges.get(&edge).ok_or(Error::UnknownEdge(edge))?;
        let (cost, position) = (state.cost, state.position);
        let recency = self.live_recency(state);
        if !self.mesh.collapse_is_valid(edge, position) {
            self.edges.get_mut(&edge).expect("checked").queue = QueueKind::Detached;
            self.rejected += 1;
            self.drain_equivalent();
            return Err(Error::InvalidCollapse(edge));
        }
        let (a, b) = (edge.lo(), edge.hi());
        let opposing = if self.config.recency_enabled {
            self.mesh.opposing_edges(edge)?
        } else {
            Default::default()
        };
        let mut old_edges = self.mesh.vertex_edges(a);
        old_edges.extend(self.mesh.vertex_edges(b));
        let carried: Vec<(VertexId, u64)> = self
            .mesh
            .vertex_edges(b)
            .into_iter()
            .filter(|k| *k != edge)
            .map(|k| (k.other(b), self.recency(k)))
            .collect();

        let (pa, pb) = (self.mesh.position(a), self.mesh.position(b));
        let mut merged_values = VertexAttributeValues::default();
        if let Some(blocks) = &mut self.blocks {
            let block = blocks[a as usize].merged(&blocks[b as usize], &pa, &pb);
            merged_values = self
                .mesh
                .attributes()
                .values_from_channels(&block.channel_values(&position));
            if self.mesh.attributes().joints.is_some() {
                merged_values.joints = block.joints.finalize(&position, block.area).ok();
            }
            blocks[a as usize] = block;
        }
        let qb = self.quadrics[b as usize];
        self.quadrics[a as usize] += qb;
        self.touched[a as usize] = true;
        self.mesh.collapse_unchecked(edge, position, &merged_values);

        for k in old_edges {
            if !self.mesh.has_edge(k) {
                self.edges.remove(&k);
            }
        }
        for o in opposing {
            let epoch = self.epoch;
            let Some(s) = self.edges.get_mut(&o) else { continue };
            if s.recency_epoch != epoch {
                s.recency = 0;
                s.recency_epoch = epoch;
            }
            s.recency += recency + 1;
            if s.queue == QueueKind::Class {
                self.move_to_class(o);
            }
        }
        for k in self.mesh.vertex_edges(a) {
            let x = k.other(a);
            let inherited = carried.iter().find(|c| c.0 == x).map_or(0, |c| c.1);
            let r = self.recency(k).max(inherited);
            self.requeue(k, r);
        }

        let record = CollapseRecord {
            edge,
            cost,
            recency,
            position: [position.x, position.y, position.z],
        };
        self.log.push(record);
        if self.config.debug_checks {
            assert!(self.mesh.adjacency_consistent(), "adjacency diverged after collapsing {edge:?}");
        }
        self.drain_equivalent();
        Ok(record)
    }

    /// Pop and collapse one edge.
    pub fn step(&mut self) -> Step {
        match self.pop_next_edge() {
            None => Step::Exhausted,
            Some(e) => match self.collapse(e) {
                Ok(r) => Step::Collapsed(r),
                Err(_) => Step::Rejected(e),
            },
        }
    }

    /// Collapse until the total triangle count is at most `target` or no
    /// valid collapse remains.
    pub fn run_to(mut self, target: usize) -> DecimationResult {
        let start = Instant::now();
        let input = (self.mesh.quad_count(), self.mesh.tri_count());
        let mut reached = true;
        while self.mesh.total_triangle_count() > target {
            if self.step() == Step::Exhausted {
                reached = false;
                log::warn!(
                    "no valid collapse left at {} total triangles (target {target})",
                    self.mesh.total_triangle_count()
                );
                break;
            }
        }
        self.finalize_attributes();
        let mesh = self.mesh.compact();
        let stats = DecimationStats {
            input_quads: input.0,
            input_tris: input.1,
            input_total_triangles: 2 * input.0 + input.1,
            target_total_triangles: target,
            quads: mesh.quad_count(),
            tris: mesh.tri_count(),
            total_triangles: mesh.total_triangle_count(),
            collapses: self.log.len(),
            rejected_collapses: self.rejected,
            classes: self.classes,
            reached_target: reached,
            init_time: self.init_time,
            collapse_time: start.elapsed(),
        };
        DecimationResult {
            mesh,
            stats,
            log: self.log,
        }
    }

    /// Vertices never touched by a collapse keep their attributes, with
    /// joint influences trimmed to the top four.
    fn finalize_attributes(&mut self) {
        let touched = &self.touched;
        if let Some(joints) = self.mesh.attributes_mut().joints.as_mut() {
            for (v, inf) in joints.iter_mut().enumerate() {
                if !touched[v] && inf.len() > crate::attributes::MAX_FINAL_INFLUENCES {
                    *inf = inf.top_normalized();
                }
            }
        }
    }
}

/// Per-vertex attribute quadrics from per-face least-squares functionals;
/// `None` when the mesh carries no attributes.
fn attribute_blocks(mesh: &Mesh) -> Option<Vec<AttributeBlock>> {
    let attrs = mesh.attributes();
    let channels = attrs.channel_count();
    if channels == 0 && attrs.joints.is_none() {
        return None;
    }
    let mut blocks = vec![
        AttributeBlock {
            channels: vec![ChannelQuadric::default(); channels],
            ..Default::default()
        };
        mesh.vertex_slots()
    ];
    for (f, face) in mesh.faces() {
        let geom = mesh.face_normal_area(f);
        let Some(normal) = geom.normal else { continue };
        let verts = face.vertices();
        let points: Vec<Vec3> = verts.iter().map(|&v| mesh.position(v)).collect();
        let fitter = FunctionalFitter::new(&points, &normal);
        let values: Vec<_> = verts.iter().map(|&v| attrs.channel_values(v as usize)).collect();
        let mut face_channels = Vec::with_capacity(channels);
        for c in 0..channels {
            let s: Vec<f64> = values.iter().map(|x| x[c]).collect();
            face_channels.push(ChannelQuadric::from_functional(&fitter.fit(&s), geom.area));
        }
        let mut face_joints: Vec<(u32, ChannelQuadric)> = Vec::new();
        if let Some(joints) = &attrs.joints {
            let mut ids: Vec<u32> = verts
                .iter()
                .flat_map(|&v| joints[v as usize].entries().iter().map(|e| e.0))
                .collect();
            ids.sort_unstable();
            ids.dedup();
            for j in ids {
                let s: Vec<f64> = verts.iter().map(|&v| joints[v as usize].weight(j)).collect();
                face_joints.push((j, ChannelQuadric::from_functional(&fitter.fit(&s), geom.area)));
            }
        }
        for &v in verts {
            let block = &mut blocks[v as usize];
            block.area += geom.area;
            for (acc, q) in block.channels.iter_mut().zip(&face_channels) {
                acc.add(q);
            }
            for (j, q) in &face_joints {
                block.joints.add_functional(*j, q);
            }
        }
    }
    for (v, block) in blocks.iter_mut().enumerate() {
        let p = mesh.position(v as VertexId);
        let dropped = block.joints.enforce_cap(MAX_JOINT_FUNCTIONALS, &p, &p, block.area);
        if !dropped.is_empty() {
            log::debug!("vertex {v}: joint cap dropped {dropped:?}");
        }
    }
    Some(blocks)
}

fn channel_weights(mesh: &Mesh, w: &AttributeWeights) -> Vec<f64> {
    let a = mesh.attributes();
    let mut out = Vec::new();
    if a.uvs.is_some() {
        out.extend([w.uv; 2]);
    }
    if a.normals.is_some() {
        out.extend([w.normal; 3]);
    }
    if a.colors.is_some() {
        out.extend([w.color; 3]);
    }
    out
}

/// Decimate `mesh` to the configured target.
pub fn decimate(mesh: &Mesh, config: &DecimationConfig) -> Result<DecimationResult> {
    let target = config.target_total(mesh.total_triangle_count());
    Ok(Decimator::new(mesh.clone(), config.clone())?.run_to(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::VertexAttributes;
    use crate::io::synth;

    fn e(a: u32, b: u32) -> EdgeKey {
        EdgeKey::new(a, b).unwrap()
    }

    fn checked() -> DecimationConfig {
        DecimationConfig {
            debug_checks: true,
            ..Default::default()
        }
    }

    #[test]
    fn approx_equal_examples() {
        assert!(approx_equal(1.0, 1.000001, 5e-6));
        assert!(!approx_equal(0.0, 1e-5, 5e-6));
        assert!(!approx_equal(0.25, 0.25, 0.0));
        assert!(approx_equal(0.25, 0.25, 1e-12));
    }

    #[test]
    fn config_validation() {
        let bad = |c: DecimationConfig| c.validate().is_err();
        assert!(bad(DecimationConfig {
            target: Target::Ratio(0.0),
            ..Default::default()
        }));
        assert!(bad(DecimationConfig {
            target: Target::Ratio(1.5),
            ..Default::default()
        }));
        assert!(bad(DecimationConfig {
            eps_abs: -1.0,
            ..Default::default()
        }));
        assert!(bad(DecimationConfig {
            sym_delta: Some(0.0),
            ..Default::default()
        }));
        assert!(DecimationConfig::default().validate().is_ok());
    }

    #[test]
    fn empty_mesh_is_rejected() {
        assert!(matches!(
            Decimator::new(Mesh::empty(), DecimationConfig::default()),
            Err(Error::EmptyMesh)
        ));
    }

    #[test]
    fn single_triangle_queues_three_edges() {
        let m = Mesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            &[vec![0, 1, 2]],
            VertexAttributes::default(),
        )
        .unwrap();
        let d = Decimator::new(m, DecimationConfig::default()).unwrap();
        assert_eq!(d.qem.len(), 3);
    }

    #[test]
    fn flat_grid_interior_edges_share_a_class() {
        let m = synth::grid(5, 5);
        let d = Decimator::new(m.clone(), DecimationConfig::default()).unwrap();
        let interior: Vec<f64> = m
            .edges()
            .into_iter()
            .filter(|k| !m.is_boundary_vertex(k.lo()) && !m.is_boundary_vertex(k.hi()))
            .map(|k| d.queued_cost(k).unwrap().0)
            .collect();
        let (lo, hi) = interior
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &c| (lo.min(c), hi.max(c)));
        assert!(hi - lo < DEFAULT_EPS_ABS, "spread {}", hi - lo);
    }

    #[test]
    fn ratio_one_is_identity() {
        let m = synth::subdivided_cube(4);
        let out = decimate(
            &m,
            &DecimationConfig {
                target: Target::Ratio(1.0),
                ..checked()
            },
        )
        .unwrap();
        assert_eq!(out.stats.collapses, 0);
        assert_eq!(out.mesh.positions(), m.positions());
        assert!(out.mesh.faces().zip(m.faces()).all(|(a, b)| a == b));
    }

    fn detach(d: &mut Decimator, k: EdgeKey) {
        d.edges.get_mut(&k).unwrap().queue = QueueKind::Detached;
    }

    #[test]
    fn collapse_raises_opposing_recency() {
        // In grid(5, 5) vertex (i, j) is 6j + i. Edge (14, 20) is shared by
        // quads whose far edges are (13, 19) and (15, 21).
        let mut d = Decimator::new(synth::grid(5, 5), checked()).unwrap();
        detach(&mut d, e(14, 20));
        d.collapse(e(14, 20)).unwrap();
        assert_eq!(d.recency(e(13, 19)), 1);
        assert_eq!(d.recency(e(15, 21)), 1);
        // Collapsing a recency-1 edge adds 2 to its own opposite edge.
        detach(&mut d, e(15, 21));
        let rec = d.collapse(e(15, 21)).unwrap();
        assert_eq!(rec.recency, 1);
        assert_eq!(d.recency(e(16, 22)), 2);
    }

    #[test]
    fn touched_class_edge_returns_to_cost_queue() {
        let mut d = Decimator::new(synth::grid(5, 5), checked()).unwrap();
        for k in d.mesh.edges() {
            d.move_to_class(k);
        }
        assert_eq!(d.queue_of(e(14, 15)), Some(QueueKind::Class));
        detach(&mut d, e(14, 20));
        d.collapse(e(14, 20)).unwrap();
        assert_eq!(d.queue_of(e(14, 15)), Some(QueueKind::Qem));
        // Untouched class members stay put.
        assert_eq!(d.queue_of(e(2, 3)), Some(QueueKind::Class));
    }

    #[test]
    fn total_triangles_never_increase() {
        let m = synth::subdivided_cube(5);
        let mut d = Decimator::new(m, checked()).unwrap();
        let mut last = d.mesh().total_triangle_count();
        for _ in 0..60 {
            if d.step() == Step::Exhausted {
                break;
            }
            let now = d.mesh().total_triangle_count();
            assert!(now <= last);
            last = now;
        }
    }

    #[test]
    fn deterministic_output() {
        let m = synth::subdivided_cube(6);
        let a = decimate(&m, &checked()).unwrap();
        let b = decimate(&m, &checked()).unwrap();
        assert_eq!(a.mesh.positions(), b.mesh.positions());
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn unreachable_target_returns_partial_result() {
        let m = synth::grid(2, 2);
        let out = decimate(
            &m,
            &DecimationConfig {
                target: Target::TotalTriangles(0),
                ..checked()
            },
        )
        .unwrap();
        assert!(!out.stats.reached_target);
        assert!(out.mesh.total_triangle_count() > 0);
    }
}
