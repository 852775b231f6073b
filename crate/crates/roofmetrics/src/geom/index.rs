use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geom::PointCloud;

const LEAF_SIZE: usize = 16;

/// Immutable kd-tree over a point cloud supporting nearest-neighbor and
/// fixed-radius queries. Radius queries are boundary-inclusive and return
/// indices in ascending order.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point3<f64>>,
    /// Point indices, permuted so each node owns a contiguous range.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud("cannot index an empty cloud"));
        }
        let points = cloud.points().to_vec();
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        let n = points.len();
        build_node(&points, &mut order, 0, n, &mut nodes);
        Ok(Self {
            points,
            order,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    /// Index and distance of the nearest point. Ties resolve to the lowest
    /// index.
    pub fn nearest(&self, query: &Point3<f64>) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, query, &mut best);
        (best.0, best.1.sqrt())
    }

    fn nearest_rec(&self, node: usize, query: &Point3<f64>, best: &mut (usize, f64)) {
        match &self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[*start..*end] {
                    let d2 = (self.points[i] - query).norm_squared();
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis] - value;
                let (near, far) = if delta <= 0.0 {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.nearest_rec(near, query, best);
                if delta * delta <= best.1 {
                    self.nearest_rec(far, query, best);
                }
            }
        }
    }

    /// All indices within `radius` of `query` (inclusive), ascending.
    pub fn within_radius(&self, query: &Point3<f64>, radius: f64) -> Vec<usize> {
        let mut hits = Vec::new();
        self.radius_rec(0, query, radius, radius * radius, &mut hits);
        hits.sort_unstable();
        hits
    }

    fn radius_rec(
        &self,
        node: usize,
        query: &Point3<f64>,
        radius: f64,
        radius2: f64,
        hits: &mut Vec<usize>,
    ) {
        match &self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[*start..*end] {
                    if (self.points[i] - query).norm_squared() <= radius2 {
                        hits.push(i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis] - value;
                if delta <= radius {
                    self.radius_rec(*left, query, radius, radius2, hits);
                }
                if -delta <= radius {
                    self.radius_rec(*right, query, radius, radius2, hits);
                }
            }
        }
    }
}

fn build_node(
    points: &[Point3<f64>],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }

    // Split on the axis with the widest extent, at the median point.
    let slice = &order[start..end];
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in slice {
        for a in 0..3 {
            lo[a] = lo[a].min(points[i][a]);
            hi[a] = hi[a].max(points[i][a]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap();
    if hi[axis] - lo[axis] == 0.0 {
        // All points coincide; no useful split.
        nodes.push(Node::Leaf { start, end });
        return id;
    }

    let mid = start + (end - start) / 2;
    order[start..end]
        .select_nth_unstable_by(mid - start, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
    let value = points[order[mid]][axis];

    nodes.push(Node::Split {
        axis,
        value,
        left: 0,
        right: 0,
    });
    let left = build_node(points, order, start, mid, nodes);
    let right = build_node(points, order, mid, end, nodes);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[id]
    {
        *l = left;
        *r = right;
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        PointCloud::new(pts).unwrap()
    }

    fn brute_nearest(points: &[Point3<f64>], q: &Point3<f64>) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d2 = (p - q).norm_squared();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn empty_cloud_errors() {
        let cloud = PointCloud::new(vec![]).unwrap();
        assert!(SpatialIndex::build(&cloud).is_err());
    }

    #[test]
    fn collinear_midpoint_query() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ])
        .unwrap();
        let index = SpatialIndex::build(&cloud).unwrap();
        let (i, _) = index.nearest(&Point3::new(1.1, 0.0, 0.0));
        assert_eq!(i, 1);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let cloud = random_cloud(1000, 7);
        let index = SpatialIndex::build(&cloud).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let q = Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let (bi, bd) = brute_nearest(cloud.points(), &q);
            let (i, d) = index.nearest(&q);
            assert_eq!(i, bi);
            assert_eq!(d, bd);
        }
    }

    #[test]
    fn radius_matches_brute_force_and_is_inclusive() {
        let cloud = random_cloud(500, 11);
        let index = SpatialIndex::build(&cloud).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let q = Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let r = rng.gen::<f64>() * 0.3;
            let brute: Vec<usize> = cloud
                .points()
                .iter()
                .enumerate()
                .filter(|(_, p)| (*p - q).norm_squared() <= r * r)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(index.within_radius(&q, r), brute);
        }
        // Exact-boundary inclusion.
        let hits = index.within_radius(cloud.points().first().unwrap(), 0.0);
        assert_eq!(hits, vec![0]);
    }

    #[test]
    fn zero_radius_away_from_points_is_empty() {
        let cloud = random_cloud(100, 3);
        let index = SpatialIndex::build(&cloud).unwrap();
        assert!(index
            .within_radius(&Point3::new(10.0, 10.0, 10.0), 0.0)
            .is_empty());
    }
}
