//! Node clouds and nearest-neighbour support domains.

use crate::error::{Error, Result};

/// Coordinates of a node in mm. One-dimensional clouds leave `y` and `z` at 0.
pub type Point = [f64; 3];

/// Generation metadata for structured clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridInfo {
    /// Node counts along x, y, z (1D bars use `[count, 1, 1]`).
    pub shape: [usize; 3],
    pub spacing: f64,
    pub origin: Point,
}

/// Ordered point set discretising a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCloud {
    points: Vec<Point>,
    dimension: usize,
    grid: Option<GridInfo>,
}

impl NodeCloud {
    /// Build a cloud from arbitrary points, rejecting duplicates.
    pub fn from_points(dimension: usize, points: Vec<Point>) -> Result<Self> {
        let cloud = Self::from_points_unchecked(dimension, points)?;
        let mut sorted: Vec<&Point> = cloud.points.iter().collect();
        sorted.sort_by(|a, b| {
            a[0].total_cmp(&b[0])
                .then(a[1].total_cmp(&b[1]))
                .then(a[2].total_cmp(&b[2]))
        });
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDiscretization(
                "cloud contains coincident points".into(),
            ));
        }
        Ok(cloud)
    }

    /// Build a cloud without the distinctness check. Coincident points are
    /// useful for exercising singular local approximations.
    pub fn from_points_unchecked(dimension: usize, points: Vec<Point>) -> Result<Self> {
        if dimension != 1 && dimension != 3 {
            return Err(Error::InvalidDiscretization(format!(
                "dimension must be 1 or 3, got {dimension}"
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidDiscretization("empty cloud".into()));
        }
        if dimension == 1 && points.iter().any(|p| p[1] != 0.0 || p[2] != 0.0) {
            return Err(Error::InvalidDiscretization(
                "1D cloud points must have zero y and z".into(),
            ));
        }
        Ok(Self {
            points,
            dimension,
            grid: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Point {
        self.points[index]
    }

    pub fn grid(&self) -> Option<&GridInfo> {
        self.grid.as_ref()
    }

    /// Characteristic nodal spacing: the grid spacing for generated clouds,
    /// otherwise the mean nearest-neighbour distance.
    pub fn spacing(&self) -> f64 {
        if let Some(g) = &self.grid {
            return g.spacing;
        }
        if self.len() < 2 {
            return 0.0;
        }
        let total: f64 = (0..self.len())
            .map(|i| {
                (0..self.len())
                    .filter(|&j| j != i)
                    .map(|j| self.distance(i, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        total / self.len() as f64
    }

    /// Euclidean distance between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        distance(&self.points[a], &self.points[b], self.dimension)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Flattened index of grid node `(i, j, k)` (0-based): z varies fastest,
    /// then y, then x.
    pub fn grid_index(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let g = self.grid?;
        let [nx, ny, nz] = g.shape;
        (i < nx && j < ny && k < nz).then_some(i * ny * nz + j * nz + k)
    }

    /// Inverse of [`NodeCloud::grid_index`].
    pub fn grid_position(&self, index: usize) -> Option<[usize; 3]> {
        let g = self.grid?;
        let [nx, ny, nz] = g.shape;
        if index >= nx * ny * nz {
            return None;
        }
        Some([index / (ny * nz), (index / nz) % ny, index % nz])
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::NodeOutOfRange {
                index,
                count: self.len(),
            });
        }
        Ok(())
    }
}

fn distance(a: &Point, b: &Point, dimension: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..dimension {
        let d = b[k] - a[k];
        sum += d * d;
    }
    sum.sqrt()
}

/// `count` equally spaced nodes on `[0, length]`.
pub fn generate_grid_1d(length: f64, count: usize) -> Result<NodeCloud> {
    if count < 2 {
        return Err(Error::InvalidDiscretization(format!(
            "a bar needs at least 2 nodes, got {count}"
        )));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidDiscretization(format!(
            "bar length must be positive, got {length}"
        )));
    }
    let spacing = length / (count - 1) as f64;
    let points = (0..count)
        .map(|i| {
            let x = if i == count - 1 {
                length
            } else {
                i as f64 * spacing
            };
            [x, 0.0, 0.0]
        })
        .collect();
    Ok(NodeCloud {
        points,
        dimension: 1,
        grid: Some(GridInfo {
            shape: [count, 1, 1],
            spacing,
            origin: [0.0; 3],
        }),
    })
}

/// Uniform `nx × ny × nz` block of nodes starting at `origin`.
///
/// Node `(i, j, k)` lands at flattened index `i·ny·nz + j·nz + k`, so a
/// 5×5×100 block has node 1299 (0-based) at `origin + (2, 2, 99)·spacing`.
pub fn generate_grid_3d(
    nx: usize,
    ny: usize,
    nz: usize,
    spacing: f64,
    origin: Point,
) -> Result<NodeCloud> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidDiscretization(format!(
            "grid counts must be positive, got {nx}×{ny}×{nz}"
        )));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidDiscretization(format!(
            "grid spacing must be positive, got {spacing}"
        )));
    }
    let mut points = Vec::with_capacity(nx * ny * nz);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                points.push([
                    origin[0] + i as f64 * spacing,
                    origin[1] + j as f64 * spacing,
                    origin[2] + k as f64 * spacing,
                ]);
            }
        }
    }
    Ok(NodeCloud {
        points,
        dimension: 3,
        grid: Some(GridInfo {
            shape: [nx, ny, nz],
            spacing,
            origin,
        }),
    })
}

/// The `n` nearest nodes to a star node, sorted by distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportDomain {
    pub star: usize,
    pub neighbors: Vec<usize>,
    pub distances: Vec<f64>,
    pub rmax: f64,
}

impl SupportDomain {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// A support whose radius vanishes cannot define weights or kernels.
    pub fn is_degenerate(&self) -> bool {
        !(self.rmax > 0.0)
    }

    /// Build a support from an explicit, distance-sorted subset of nodes.
    pub fn from_subset(cloud: &NodeCloud, star: usize, nodes: Vec<usize>) -> Result<Self> {
        cloud.check_index(star)?;
        for &v in &nodes {
            cloud.check_index(v)?;
        }
        let distances: Vec<f64> = nodes.iter().map(|&v| cloud.distance(v, star)).collect();
        if distances.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidDiscretization(
                "support nodes must be sorted by distance".into(),
            ));
        }
        let rmax = distances.last().copied().unwrap_or(0.0);
        Ok(Self {
            star,
            neighbors: nodes,
            distances,
            rmax,
        })
    }
}

/// Exhaustive k-nearest-neighbour search with ties broken by node index.
pub fn neighbors(cloud: &NodeCloud, star: usize, n: usize) -> Result<SupportDomain> {
    cloud.check_index(star)?;
    if n == 0 || n > cloud.len() {
        return Err(Error::InsufficientNodes {
            requested: n,
            available: cloud.len(),
        });
    }
    let ranked = rank_by_distance(cloud, star);
    let (neighbors, distances): (Vec<usize>, Vec<f64>) = ranked.into_iter().take(n).unzip();
    let rmax = distances[n - 1];
    Ok(SupportDomain {
        star,
        neighbors,
        distances,
        rmax,
    })
}

/// Every node paired with its distance to `star`, nearest first. The sort is
/// stable over ascending indices, which fixes the tie-break.
pub(crate) fn rank_by_distance(cloud: &NodeCloud, star: usize) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = (0..cloud.len())
        .map(|v| (v, cloud.distance(v, star)))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bar_grid_matches_unit_spacing() {
        let c = generate_grid_1d(99.0, 100).unwrap();
        assert_eq!(c.len(), 100);
        for (i, p) in c.points().iter().enumerate() {
            assert_eq!(p[0], i as f64);
        }
        assert_eq!(c.spacing(), 1.0);
    }

    #[test]
    fn bar_grid_small_cases() {
        let c = generate_grid_1d(1.0, 2).unwrap();
        assert_eq!(c.points(), &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let c = generate_grid_1d(10.0, 5).unwrap();
        let xs: Vec<f64> = c.points().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn bar_grid_rejects_bad_input() {
        assert!(matches!(
            generate_grid_1d(10.0, 1),
            Err(Error::InvalidDiscretization(_))
        ));
        assert!(generate_grid_1d(0.0, 5).is_err());
    }

    #[test]
    fn beam_grid_loop_order() {
        let c = generate_grid_3d(5, 5, 100, 1.0, [1.0; 3]).unwrap();
        assert_eq!(c.len(), 2500);
        // 1-based node 1300 is the loaded mid-node, 1201 the clamped one.
        assert_eq!(c.point(1299), [3.0, 3.0, 100.0]);
        assert_eq!(c.point(1200), [3.0, 3.0, 1.0]);
        assert_eq!(c.grid_index(2, 2, 99), Some(1299));
        assert_eq!(c.grid_position(1299), Some([2, 2, 99]));
        let single = generate_grid_3d(1, 1, 1, 1.0, [0.0; 3]).unwrap();
        assert_eq!(single.points(), &[[0.0; 3]]);
        assert!(generate_grid_3d(0, 5, 5, 1.0, [0.0; 3]).is_err());
    }

    #[test]
    fn neighbors_break_ties_by_index() {
        let c = generate_grid_1d(3.0, 4).unwrap();
        let s = neighbors(&c, 1, 3).unwrap();
        assert_eq!(s.neighbors, vec![1, 0, 2]);
        assert_eq!(s.distances, vec![0.0, 1.0, 1.0]);
        assert_eq!(s.rmax, 1.0);
    }

    #[test]
    fn tip_support_radius() {
        let c = generate_grid_1d(99.0, 100).unwrap();
        let s = neighbors(&c, 99, 20).unwrap();
        assert_eq!(s.rmax, 19.0);
        assert_eq!(s.neighbors, (80..100).rev().collect::<Vec<_>>());
    }

    #[test]
    fn single_neighbor_is_degenerate() {
        let c = generate_grid_1d(99.0, 100).unwrap();
        let s = neighbors(&c, 42, 1).unwrap();
        assert_eq!(s.neighbors, vec![42]);
        assert!(s.is_degenerate());
    }

    #[test]
    fn oversized_support_is_rejected() {
        let c = generate_grid_1d(9.0, 10).unwrap();
        assert!(matches!(
            neighbors(&c, 0, 11),
            Err(Error::InsufficientNodes { requested: 11, available: 10 })
        ));
        assert!(matches!(neighbors(&c, 10, 2), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn duplicates_rejected_by_checked_constructor() {
        let pts = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0; 3]];
        assert!(NodeCloud::from_points(1, pts.clone()).is_err());
        assert!(NodeCloud::from_points_unchecked(1, pts).is_ok());
    }

    proptest! {
        #[test]
        fn support_matches_brute_force(
            pts in proptest::collection::vec((-10i32..10, -10i32..10, -10i32..10), 2..40),
            star_sel in 0usize..1000,
            n_sel in 0usize..1000,
        ) {
            let mut points: Vec<Point> = pts.iter().map(|&(x, y, z)| [x as f64, y as f64, z as f64]).collect();
            points.sort_by(|a, b| a.partial_cmp(b).unwrap());
            points.dedup();
            let cloud = NodeCloud::from_points(3, points).unwrap();
            let star = star_sel % cloud.len();
            let n = 1 + n_sel % cloud.len();
            let s = neighbors(&cloud, star, n).unwrap();
            let again = neighbors(&cloud, star, n).unwrap();
            prop_assert_eq!(&s, &again);
            prop_assert_eq!(s.neighbors[0], star);
            prop_assert!(s.distances.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(s.rmax, s.distances[n - 1]);

            // Brute force: a node is in the support iff fewer than n nodes
            // strictly precede it in (distance, index) order.
            let all: Vec<f64> = (0..cloud.len()).map(|v| {
                let (a, b) = (cloud.point(v), cloud.point(star));
                ((a[0]-b[0]).powi(2) + (a[1]-b[1]).powi(2) + (a[2]-b[2]).powi(2)).sqrt()
            }).collect();
            for v in 0..cloud.len() {
                let ahead = (0..cloud.len()).filter(|&u| all[u] < all[v] || (all[u] == all[v] && u < v)).count();
                prop_assert_eq!(ahead < n, s.neighbors.contains(&v));
            }
        }

        #[test]
        fn interior_support_is_symmetric(half in 1usize..10, star in 20usize..80) {
            let c = generate_grid_1d(99.0, 100).unwrap();
            let s = neighbors(&c, star, 2 * half + 1).unwrap();
            let mut offsets: Vec<i64> = s.neighbors.iter().map(|&v| v as i64 - star as i64).collect();
            offsets.sort();
            let expected: Vec<i64> = (-(half as i64)..=half as i64).collect();
            prop_assert_eq!(offsets, expected);
        }
    }
}
