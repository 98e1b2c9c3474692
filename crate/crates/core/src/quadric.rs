//! Plane quadrics: `Q(x) = xᵀAx − 2bᵀx + c`.
//!
//! A single plane through `p` with unit normal `n` has `A = nnᵀ`,
//! `b = (n·p)n`, `c = (n·p)²`, so `Q(x) = (n·(x − p))²`. Sums of plane
//! quadrics measure the (weighted) squared distance to a set of planes.

use std::ops::{Add, AddAssign, Mul};

use nalgebra::Matrix3;

use crate::mesh::{FaceId, Mesh, VertexId};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadric {
    a: Matrix3<f64>,
    b: Vec3,
    c: f64,
    /// Sum of the weights of the accumulated planes (for roundoff bounds).
    weight: f64,
}

impl Default for Quadric {
    fn default() -> Self {
        Self::zero()
    }
}

impl Quadric {
    pub fn zero() -> Self {
        Self {
            a: Matrix3::zeros(),
            b: Vec3::zeros(),
            c: 0.0,
            weight: 0.0,
        }
    }

    /// Squared distance to the plane through `p` with normal `n`.
    pub fn plane(p: &Vec3, n: &Vec3) -> Result<Self> {
        let len = n.norm();
        if !((len - 1.0).abs() <= 1e-6) {
            return Err(Error::NonUnitNormal(len));
        }
        Ok(Self::plane_unchecked(p, n))
    }

    pub(crate) fn plane_unchecked(p: &Vec3, n: &Vec3) -> Self {
        let d = n.dot(p);
        Self {
            a: n * n.transpose(),
            b: n * d,
            c: d * d,
            weight: 1.0,
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.a
    }

    pub fn linear(&self) -> &Vec3 {
        &self.b
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        x.dot(&(self.a * x)) - 2.0 * self.b.dot(x) + self.c
    }

    /// `∇Q(x) = 2(Ax − b)`.
    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        2.0 * (self.a * x - self.b)
    }
}

impl Add for Quadric {
    type Output = Quadric;

    fn add(mut self, o: Quadric) -> Quadric {
        self += o;
        self
    }
}

impl AddAssign for Quadric {
    fn add_assign(&mut self, o: Quadric) {
        self.a += o.a;
        self.b += o.b;
        self.c += o.c;
        self.weight += o.weight;
    }
}

impl Mul<f64> for Quadric {
    type Output = Quadric;

    fn mul(self, s: f64) -> Quadric {
        Quadric {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            weight: self.weight * s,
        }
    }
}

/// `area(f) · Quadric(vertex of f, normal(f))`; zero for degenerate faces.
pub fn face_quadric(mesh: &Mesh, face: FaceId) -> Quadric {
    let geom = mesh.face_normal_area(face);
    match (geom.normal, mesh.face(face)) {
        (Some(n), Some(f)) => {
            Quadric::plane_unchecked(&mesh.position(f.vertices()[0]), &n) * geom.area
        }
        _ => Quadric::zero(),
    }
}

/// Face quadric with its plane anchored at corner `anchor`. For planar
/// faces this equals [`face_quadric`]; for non-planar quads it keeps every
/// vertex on the planes of its own accumulated quadric.
pub fn face_quadric_at(mesh: &Mesh, face: FaceId, anchor: VertexId) -> Quadric {
    let geom = mesh.face_normal_area(face);
    match geom.normal {
        Some(n) => Quadric::plane_unchecked(&mesh.position(anchor), &n) * geom.area,
        None => Quadric::zero(),
    }
}

/// Thresholds deciding when the 3×3 placement system is too ill-conditioned
/// to solve directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverThresholds {
    pub max_condition: f64,
    /// Smallest eigenvalue allowed, relative to the trace.
    pub min_pivot_ratio: f64,
}

impl Default for SolverThresholds {
    fn default() -> Self {
        Self {
            max_condition: 1e8,
            min_pivot_ratio: 1e-12,
        }
    }
}

/// Solve `Ax = b` for the minimiser of `q`, or if the system is
/// rank-deficient return whichever of `e0`, `e1`, midpoint evaluates
/// lowest (ties go to the earlier candidate).
pub fn optimal_position(q: &Quadric, e0: &Vec3, e1: &Vec3, thresholds: &SolverThresholds) -> Vec3 {
    if let Some(x) = solve_full_rank(q, thresholds) {
        return x;
    }
    best_candidate(q, &[*e0, *e1, (e0 + e1) * 0.5])
}

fn solve_full_rank(q: &Quadric, t: &SolverThresholds) -> Option<Vec3> {
    let trace = q.a.trace();
    if !(trace > 0.0) {
        return None;
    }
    let eig = q.a.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > t.min_pivot_ratio * trace) || hi / lo > t.max_condition {
        return None;
    }
    let x = q.a.try_inverse()? * q.b;
    x.iter().all(|c| c.is_finite()).then_some(x)
}

/// Argmin of `q` over `candidates`; first wins ties.
pub fn best_candidate(q: &Quadric, candidates: &[Vec3]) -> Vec3 {
    let mut best = candidates[0];
    let mut best_val = q.eval(&best);
    for c in &candidates[1..] {
        let v = q.eval(c);
        if v < best_val {
            best = *c;
            best_val = v;
        }
    }
    best
}

/// Which collapse cost to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    /// Error introduced relative to the current endpoint errors:
    /// `(Q0 + Q1)(v) − Q0(e0) − Q1(e1)`.
    #[default]
    New,
    /// Accumulated error `(Q0 + Q1)(v)`.
    Original,
}

/// Anything that can be evaluated like a quadric.
pub trait ErrorForm {
    fn error_at(&self, x: &Vec3) -> f64;
}

impl ErrorForm for Quadric {
    fn error_at(&self, x: &Vec3) -> f64 {
        self.eval(x)
    }
}

/// Collapse cost of merging `e0`/`e1` at `v`, where `merged` is `q0 + q1`.
pub fn collapse_cost_merged<Q: ErrorForm>(
    merged: &Q,
    q0: &Q,
    q1: &Q,
    e0: &Vec3,
    e1: &Vec3,
    v: &Vec3,
    mode: CostMode,
) -> f64 {
    let total = merged.error_at(v);
    match mode {
        CostMode::Original => total,
        CostMode::New => total - (q0.error_at(e0) + q1.error_at(e1)),
    }
}

pub fn collapse_cost(q0: &Quadric, q1: &Quadric, e0: &Vec3, e1: &Vec3, v: &Vec3, mode: CostMode) -> f64 {
    collapse_cost_merged(&(*q0 + *q1), q0, q1, e0, e1, v, mode)
}
