//! Sampled surface distances and quad preservation statistics.
//!
//! Distances are measured from area-uniform surface samples to the exact
//! closest point on the other surface (quads split into two triangles).
//! Chamfer is the average of the two directed mean distances and Hausdorff
//! the larger of the two directed maxima; both are divided by the bounding
//! box diagonal of the first (reference) mesh.

pub mod bvh;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bvh::{closest_point_on_triangle, Bvh, Closest};

use crate::attributes::{lbs_pose, SkeletonPose};
use crate::mesh::{FaceId, Mesh};
use crate::{Error, Result, Vec3};

pub const DEFAULT_SAMPLES: usize = 100_000;

/// Triangulated view of a mesh surface.
#[derive(Debug, Clone)]
pub struct Surface {
    pub triangles: Vec<[Vec3; 3]>,
    /// Source face of every triangle.
    pub faces: Vec<FaceId>,
}

impl Surface {
    pub fn from_mesh(mesh: &Mesh) -> Self {
        Self::with_positions(mesh, mesh.positions())
    }

    /// Surface of `mesh` with its vertices moved to `positions`.
    pub fn with_positions(mesh: &Mesh, positions: &[Vec3]) -> Self {
        let mut triangles = Vec::with_capacity(2 * mesh.face_count());
        let mut faces = Vec::with_capacity(2 * mesh.face_count());
        for (f, face) in mesh.faces() {
            let v = face.vertices();
            for i in 1..v.len() - 1 {
                triangles.push([
                    positions[v[0] as usize],
                    positions[v[i] as usize],
                    positions[v[i + 1] as usize],
                ]);
                faces.push(f);
            }
        }
        Self { triangles, faces }
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(triangle_area).sum()
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        let mut it = self.triangles.iter().flatten();
        let Some(first) = it.next() else { return 0.0 };
        let (lo, hi) = it.fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        (hi - lo).norm()
    }

    /// `n` area-uniform samples; identical for identical inputs.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec3>> {
        if self.triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut cdf = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for t in &self.triangles {
            total += triangle_area(t);
            cdf.push(total);
        }
        if !(total > 0.0) {
            return Err(Error::ZeroArea);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| {
                let r = rng.random::<f64>() * total;
                let i = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
                let [a, b, c] = &self.triangles[i];
                let s = rng.random::<f64>().sqrt();
                let t = rng.random::<f64>();
                a * (1.0 - s) + b * (s * (1.0 - t)) + c * (s * t)
            })
            .collect())
    }
}

fn triangle_area(t: &[Vec3; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm()
}

/// `n` area-uniform samples on the surface of `mesh`.
pub fn sample_surface(mesh: &Mesh, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    Surface::from_mesh(mesh).sample(n, seed)
}

/// Un-normalized directed distance statistics between two surfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSummary {
    pub mean_ab: f64,
    pub mean_ba: f64,
    pub max_ab: f64,
    pub max_ba: f64,
}

impl DistanceSummary {
    pub fn chamfer(&self) -> f64 {
        0.5 * (self.mean_ab + self.mean_ba)
    }

    pub fn hausdorff(&self) -> f64 {
        self.max_ab.max(self.max_ba)
    }
}

fn directed(samples: &[Vec3], target: &Bvh) -> (f64, f64) {
    let d: Vec<f64> = samples
        .par_iter()
        .map(|p| target.closest(p).map_or(f64::INFINITY, |c| c.distance))
        .collect();
    let mean = d.iter().sum::<f64>() / d.len().max(1) as f64;
    let max = d.iter().copied().fold(0.0, f64::max);
    (mean, max)
}

/// Both directed distances with `n` samples drawn on each surface using the
/// same `seed`. Bitwise identical surfaces are exactly zero apart, which
/// closest-point rounding would otherwise blur to ~1e-17.
pub fn distance_summary(a: &Surface, b: &Surface, n: usize, seed: u64) -> Result<DistanceSummary> {
    let sa = a.sample(n, seed)?;
    let sb = b.sample(n, seed)?;
    if a.triangles == b.triangles {
        return Ok(DistanceSummary {
            mean_ab: 0.0,
            mean_ba: 0.0,
            max_ab: 0.0,
            max_ba: 0.0,
        });
    }
    let (mean_ab, max_ab) = directed(&sa, &Bvh::new(b.triangles.clone()));
    let (mean_ba, max_ba) = directed(&sb, &Bvh::new(a.triangles.clone()));
    Ok(DistanceSummary {
        mean_ab,
        mean_ba,
        max_ab,
        max_ba,
    })
}

fn normalizer(a: &Surface) -> Result<f64> {
    let d = a.bounding_box_diagonal();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::ZeroArea)
    }
}

/// Chamfer distance normalized by the diagonal of `a`.
pub fn chamfer(a: &Mesh, b: &Mesh, n: usize, seed: u64) -> Result<f64> {
    let (sa, sb) = (Surface::from_mesh(a), Surface::from_mesh(b));
    Ok(distance_summary(&sa, &sb, n, seed)?.chamfer() / normalizer(&sa)?)
}

/// Sampled Hausdorff distance normalized by the diagonal of `a`.
pub fn hausdorff(a: &Mesh, b: &Mesh, n: usize, seed: u64) -> Result<f64> {
    let (sa, sb) = (Surface::from_mesh(a), Surface::from_mesh(b));
    Ok(distance_summary(&sa, &sb, n, seed)?.hausdorff() / normalizer(&sa)?)
}

/// Face counts of an input/output pair and the ratio
/// `(out_q / out_t) / (in_q / in_t)` where defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadStats {
    pub in_quads: usize,
    pub in_tris: usize,
    pub out_quads: usize,
    pub out_tris: usize,
    /// `None` when the input has no quads or either side has no triangles
    /// (0 if the output has no quads).
    pub quad_ratio_preservation: Option<f64>,
}

pub fn quad_stats(input: &Mesh, output: &Mesh) -> QuadStats {
    quad_stats_from_counts(input.quad_count(), input.tri_count(), output.quad_count(), output.tri_count())
}

pub fn quad_stats_from_counts(in_quads: usize, in_tris: usize, out_quads: usize, out_tris: usize) -> QuadStats {
    let ratio = if in_quads == 0 {
        None
    } else if out_quads == 0 {
        Some(0.0)
    } else if in_tris == 0 || out_tris == 0 {
        None
    } else {
        Some((out_quads as f64 / out_tris as f64) / (in_quads as f64 / in_tris as f64))
    };
    QuadStats {
        in_quads,
        in_tris,
        out_quads,
        out_tris,
        quad_ratio_preservation: ratio,
    }
}

/// Comparison of a reference mesh against an output mesh. Face counts
/// describe the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub chamfer: f64,
    pub hausdorff: f64,
    pub quads: usize,
    pub tris: usize,
    pub total_triangles: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_ratio_preservation: Option<f64>,
    pub sample_count: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
}

fn report(summary: &DistanceSummary, norm: f64, output: &Mesh, stats: &QuadStats, n: usize, seed: u64) -> MetricReport {
    MetricReport {
        chamfer: summary.chamfer() / norm,
        hausdorff: summary.hausdorff() / norm,
        quads: output.quad_count(),
        tris: output.tri_count(),
        total_triangles: output.total_triangle_count(),
        quad_ratio_preservation: stats.quad_ratio_preservation,
        sample_count: n,
        seed,
        frame: None,
    }
}

/// Rest-pose comparison of `reference` against `output`.
pub fn compare(reference: &Mesh, output: &Mesh, n: usize, seed: u64) -> Result<MetricReport> {
    let (sa, sb) = (Surface::from_mesh(reference), Surface::from_mesh(output));
    let summary = distance_summary(&sa, &sb, n, seed)?;
    Ok(report(&summary, normalizer(&sa)?, output, &quad_stats(reference, output), n, seed))
}

/// Metrics for every pose after skinning both meshes. Distances are
/// normalized by the rest-pose diagonal of `reference`, so a rigid motion of
/// the whole skeleton leaves every value unchanged.
pub fn animated_metrics(
    reference: &Mesh,
    output: &Mesh,
    poses: &[SkeletonPose],
    n: usize,
    seed: u64,
) -> Result<Vec<MetricReport>> {
    let norm = normalizer(&Surface::from_mesh(reference))?;
    let stats = quad_stats(reference, output);
    poses
        .iter()
        .map(|pose| {
            let pa = lbs_pose(reference, pose)?;
            let pb = lbs_pose(output, pose)?;
            let sa = Surface::with_positions(reference, &pa);
            let sb = Surface::with_positions(output, &pb);
            let summary = distance_summary(&sa, &sb, n, seed)?;
            Ok(report(&summary, norm, output, &stats, n, seed))
        })
        .collect()
}
