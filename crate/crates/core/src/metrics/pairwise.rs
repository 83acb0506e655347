use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use super::kdtree::KdTree;
use crate::geom::V3;

/// Neighborhood used to detect points near sharp edges (unit-normalized space).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeParams {
    pub radius: f64,
    pub normal_dot_threshold: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams { radius: 0.004, normal_dot_threshold: 0.2 }
    }
}

/// Nearest neighbor in `target` of every point of `queries`: (index, squared distance).
pub fn nearest_neighbors(queries: &[V3], target: &[V3]) -> Vec<(usize, f64)> {
    let tree = KdTree::new(target);
    queries.par_iter().map(|&q| tree.nearest(q).expect("non-empty target")).collect()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Mean squared nearest-neighbor distance in both directions, summed.
pub fn chamfer_points(x: &[V3], y: &[V3]) -> f64 {
    let xy = nearest_neighbors(x, y);
    let yx = nearest_neighbors(y, x);
    mean(xy.iter().map(|p| p.1)) + mean(yx.iter().map(|p| p.1))
}

pub fn chamfer(x: &PointCloud, y: &PointCloud) -> f64 {
    chamfer_points(&x.points, &y.points)
}

/// Indices (ascending) of points with a neighbor within `radius` whose
/// normal differs enough.
pub fn classify_edge_points(cloud: &PointCloud, params: &EdgeParams) -> Vec<usize> {
    let tree = KdTree::new(&cloud.points);
    let r_sq = params.radius * params.radius;
    (0..cloud.len())
        .into_par_iter()
        .filter(|&i| {
            let ni = cloud.normals[i];
            tree.within(cloud.points[i], r_sq).into_iter().any(|j| {
                let nj = cloud.normals[j];
                j != i && (ni[0] * nj[0] + ni[1] * nj[1] + ni[2] * nj[2]).abs() < params.normal_dot_threshold
            })
        })
        .collect()
}

/// Chamfer restricted to edge points; `None` when either side has none.
pub fn edge_chamfer(x: &PointCloud, y: &PointCloud, params: &EdgeParams) -> Option<f64> {
    let ex = classify_edge_points(x, params);
    let ey = classify_edge_points(y, params);
    if ex.is_empty() || ey.is_empty() {
        return None;
    }
    Some(chamfer(&x.subset(&ex), &y.subset(&ey)))
}

/// Average normal agreement against nearest neighbors, both directions.
pub fn normal_consistency(x: &PointCloud, y: &PointCloud) -> f64 {
    let agree = |a: &PointCloud, b: &PointCloud| {
        let nn = nearest_neighbors(&a.points, &b.points);
        mean(nn.iter().enumerate().map(|(i, &(j, _))| {
            let (p, q) = (a.normals[i], b.normals[j]);
            p[0] * q[0] + p[1] * q[1] + p[2] * q[2]
        }))
    };
    0.5 * (agree(x, y) + agree(y, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: Vec<V3>) -> PointCloud {
        let n = points.len();
        PointCloud { points, normals: vec![[0.0, 0.0, 1.0]; n] }
    }

    #[test]
    fn chamfer_hand_cases() {
        assert_eq!(chamfer(&cloud(vec![[0.0; 3]]), &cloud(vec![[1.0, 0.0, 0.0]])), 2.0);
        assert_eq!(chamfer(&cloud(vec![[0.0; 3], [2.0, 0.0, 0.0]]), &cloud(vec![[1.0, 0.0, 0.0]])), 2.0);
        let a = cloud(vec![[0.0; 3], [1.0, 2.0, 3.0]]);
        assert_eq!(chamfer(&a, &a), 0.0);
    }

    #[test]
    fn normal_consistency_sign_law() {
        let a = cloud(vec![[0.0; 3], [1.0, 0.0, 0.0]]);
        let mut b = a.clone();
        assert_eq!(normal_consistency(&a, &b), 1.0);
        b.normals = vec![[0.0, 0.0, -1.0]; 2];
        assert_eq!(normal_consistency(&a, &b), -1.0);
    }

    #[test]
    fn normal_consistency_two_point_hand_case() {
        // x0 -> y0 (dot 0), y0 -> x0 (dot 0), y1 -> x1 (dot 1): ½(½(0 + 1) + ½(0 + 1)) = ½.
        let x = PointCloud { points: vec![[0.0; 3], [5.0, 0.0, 0.0]], normals: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] };
        let y = PointCloud { points: vec![[0.1, 0.0, 0.0], [5.1, 0.0, 0.0]], normals: vec![[0.0, 1.0, 0.0], [0.0, 1.0, 0.0]] };
        assert_eq!(normal_consistency(&x, &y), 0.5);
    }

    #[test]
    fn plane_and_single_point_have_no_edges() {
        let p = cloud((0..100).map(|i| [i as f64 * 0.001, 0.0, 0.0]).collect());
        assert!(classify_edge_points(&p, &EdgeParams::default()).is_empty());
        assert!(classify_edge_points(&cloud(vec![[0.0; 3]]), &EdgeParams::default()).is_empty());
        assert_eq!(edge_chamfer(&p, &p, &EdgeParams::default()), None);
    }
}
