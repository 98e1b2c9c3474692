//! Bounding-volume hierarchy for closest-point queries on triangles.

use crate::Vec3;

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision
/// Detection, 5.1.5).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn distance_squared(&self, p: &Vec3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros());
        d.norm_squared()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closest {
    pub distance: f64,
    /// Index into the triangle list the hierarchy was built from.
    pub triangle: usize,
    pub point: Vec3,
}

const LEAF_SIZE: usize = 4;

pub struct Bvh {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl Bvh {
    pub fn new(triangles: Vec<[Vec3; 3]>) -> Self {
        let mut bvh = Self {
            order: (0..triangles.len()).collect(),
            triangles,
            nodes: Vec::new(),
        };
        if !bvh.triangles.is_empty() {
            let centroids: Vec<Vec3> = bvh
                .triangles
                .iter()
                .map(|t| (t[0] + t[1] + t[2]) / 3.0)
                .collect();
            bvh.build(0, bvh.triangles.len(), &centroids);
        }
        bvh
    }

    pub fn triangles(&self) -> &[[Vec3; 3]] {
        &self.triangles
    }

    fn build(&mut self, start: usize, end: usize, centroids: &[Vec3]) -> usize {
        let mut bounds = Aabb::empty();
        let mut cb = Aabb::empty();
        for &i in &self.order[start..end] {
            for p in &self.triangles[i] {
                bounds.grow(p);
            }
            cb.grow(&centroids[i]);
        }
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        let extent = cb.hi - cb.lo;
        let axis = extent.imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis]
                .total_cmp(&centroids[b][axis])
                .then(a.cmp(&b))
        });
        self.nodes.push(Node::Leaf { bounds, start, end });
        let left = self.build(start, mid, centroids);
        let right = self.build(mid, end, centroids);
        self.nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    /// Closest point over all triangles; ties go to the lower triangle
    /// index. `None` only for an empty hierarchy.
    pub fn closest(&self, p: &Vec3) -> Option<Closest> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(f64, usize, Vec3)> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if let Some((d2, _, _)) = best {
                if node.bounds().distance_squared(p) > d2 {
                    continue;
                }
            }
            match node {
                Node::Leaf { start, end, .. } => {
                    for &i in &self.order[*start..*end] {
                        let [a, b, c] = &self.triangles[i];
                        let q = closest_point_on_triangle(p, a, b, c);
                        let d2 = (q - p).norm_squared();
                        let better = match best {
                            None => true,
                            Some((bd, bi, _)) => d2 < bd || (d2 == bd && i < bi),
                        };
                        if better {
                            best = Some((d2, i, q));
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[*left].bounds().distance_squared(p);
                    let dr = self.nodes[*right].bounds().distance_squared(p);
                    // Visit the nearer child first.
                    if dl <= dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best.map(|(d2, triangle, point)| Closest {
            distance: d2.sqrt(),
            triangle,
            point,
        })
    }
}
