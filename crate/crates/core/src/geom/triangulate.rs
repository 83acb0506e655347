use super::regions::Region;
use super::{orient, InterpretError, InterpretReason, V2};

/// Signed shoelace area; positive for counter-clockwise loops.
pub fn polygon_area(pts: &[V2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

fn in_triangle(p: V2, a: V2, b: V2, c: V2) -> bool {
    orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
}

/// Index of a vertex of `outer` visible from `m`, the rightmost hole vertex.
fn bridge_vertex(outer: &[usize], pts: &[V2], m: V2) -> Option<usize> {
    let n = outer.len();
    // Closest intersection of the ray m + t(1, 0) with an outer edge.
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let (a, b) = (pts[outer[i]], pts[outer[(i + 1) % n]]);
        if (a[1] > m[1]) == (b[1] > m[1]) && a[1] != m[1] && b[1] != m[1] {
            continue;
        }
        if a[1] == b[1] {
            if a[1] == m[1] {
                for (k, p) in [(i, a), ((i + 1) % n, b)] {
                    if p[0] >= m[0] && best.map_or(true, |(t, _)| p[0] - m[0] < t) {
                        best = Some((p[0] - m[0], k));
                    }
                }
            }
            continue;
        }
        let t = a[0] + (m[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]) - m[0];
        if t < 0.0 {
            continue;
        }
        // Prefer the edge endpoint with larger x as the candidate.
        let k = if a[0] > b[0] { i } else { (i + 1) % n };
        if best.map_or(true, |(bt, _)| t < bt) {
            best = Some((t, k));
        }
    }
    let (t, mut cand) = best?;
    let hit = [m[0] + t, m[1]];
    let p = pts[outer[cand]];
    if p == hit {
        return Some(cand);
    }
    // Reflex vertices inside triangle (m, hit, p) block the view; take the
    // one with the smallest angle to the ray.
    let tri = if orient(m, hit, p) >= 0.0 { [m, hit, p] } else { [m, p, hit] };
    let mut best_angle = f64::INFINITY;
    let mut best_dist = f64::INFINITY;
    for i in 0..n {
        let q = pts[outer[i]];
        if i == cand || q == m {
            continue;
        }
        let prev = pts[outer[(i + n - 1) % n]];
        let next = pts[outer[(i + 1) % n]];
        if orient(prev, q, next) > 0.0 || !in_triangle(q, tri[0], tri[1], tri[2]) {
            continue;
        }
        let d = [q[0] - m[0], q[1] - m[1]];
        let angle = d[1].abs().atan2(d[0]);
        let dist = d[0] * d[0] + d[1] * d[1];
        if angle < best_angle || (angle == best_angle && dist < best_dist) {
            best_angle = angle;
            best_dist = dist;
            cand = i;
        }
    }
    Some(cand)
}

/// Merges holes into the outer loop through zero-width bridges.
fn merge_holes(region: &Region, pts: &mut Vec<V2>) -> Result<Vec<usize>, InterpretError> {
    pts.extend_from_slice(&region.outer);
    let mut outer: Vec<usize> = (0..region.outer.len()).collect();
    let mut holes: Vec<Vec<usize>> = Vec::new();
    for h in &region.holes {
        let base = pts.len();
        pts.extend_from_slice(h);
        holes.push((base..base + h.len()).collect());
    }
    let rightmost = |h: &[usize], pts: &[V2]| {
        (0..h.len()).max_by(|&a, &b| pts[h[a]][0].total_cmp(&pts[h[b]][0]).then(pts[h[b]][1].total_cmp(&pts[h[a]][1]))).unwrap()
    };
    holes.sort_by(|a, b| pts[b[rightmost(b, pts)]][0].total_cmp(&pts[a[rightmost(a, pts)]][0]));
    for h in holes {
        let mi = rightmost(&h, pts);
        let m = pts[h[mi]];
        let o = bridge_vertex(&outer, pts, m)
            .ok_or_else(|| InterpretError::new(None, InterpretReason::EmptyResult, "hole is not inside its outer loop"))?;
        let mut merged = Vec::with_capacity(outer.len() + h.len() + 2);
        merged.extend_from_slice(&outer[..=o]);
        for k in 0..=h.len() {
            merged.push(h[(mi + k) % h.len()]);
        }
        merged.push(outer[o]);
        merged.extend_from_slice(&outer[o + 1..]);
        outer = merged;
    }
    Ok(outer)
}

/// Triangulates a region by ear clipping. Returns the vertex list and
/// counter-clockwise triangles indexing into it.
pub fn triangulate_region(region: &Region) -> Result<(Vec<V2>, Vec<[usize; 3]>), InterpretError> {
    let mut pts = Vec::new();
    let mut poly = merge_holes(region, &mut pts)?;
    let mut tris = Vec::with_capacity(poly.len());
    let scale = pts.iter().flat_map(|p| p.iter()).fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-14 * scale * scale;
    let mut guard = 0usize;
    let mut i = 0usize;
    while poly.len() > 3 {
        let n = poly.len();
        let (ia, ib, ic) = (poly[(i + n - 1) % n], poly[i % n], poly[(i + 1) % n]);
        let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
        let convex = orient(a, b, c) > eps;
        let ear = convex
            && poly.iter().all(|&k| {
                let p = pts[k];
                p == a || p == b || p == c || !in_triangle(p, a, b, c)
            });
        if ear {
            tris.push([ia, ib, ic]);
            poly.remove(i % n);
            guard = 0;
            i %= poly.len();
        } else {
            i = (i + 1) % n;
            guard += 1;
            if guard > n {
                // Drop a degenerate collinear vertex if one exists.
                if let Some(k) = (0..n).find(|&k| {
                    let (p, q, r) = (pts[poly[(k + n - 1) % n]], pts[poly[k]], pts[poly[(k + 1) % n]]);
                    orient(p, q, r).abs() <= eps && (q[0] - p[0]) * (r[0] - q[0]) + (q[1] - p[1]) * (r[1] - q[1]) <= 0.0
                }) {
                    poly.remove(k);
                    guard = 0;
                    i = 0;
                    continue;
                }
                return Err(InterpretError::new(None, InterpretReason::EmptyResult, "triangulation did not converge"));
            }
        }
    }
    if poly.len() == 3 && orient(pts[poly[0]], pts[poly[1]], pts[poly[2]]) > eps {
        tris.push([poly[0], poly[1], poly[2]]);
    }
    Ok((pts, tris))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_area(pts: &[V2], tris: &[[usize; 3]]) -> f64 {
        tris.iter().map(|t| 0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]])).sum()
    }

    #[test]
    fn shoelace_signs() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        assert_eq!(polygon_area(&sq), 4.0);
        let mut rev = sq.to_vec();
        rev.reverse();
        assert_eq!(polygon_area(&rev), -4.0);
    }

    #[test]
    fn concave_polygon_area_is_preserved() {
        let l = Region {
            outer: vec![[0.0, 0.0], [3.0, 0.0], [3.0, 1.0], [1.0, 1.0], [1.0, 3.0], [0.0, 3.0]],
            holes: vec![],
        };
        let (pts, tris) = triangulate_region(&l).unwrap();
        assert_eq!(tris.len(), 4);
        assert!((total_area(&pts, &tris) - 5.0).abs() < 1e-12);
        assert!(tris.iter().all(|t| orient(pts[t[0]], pts[t[1]], pts[t[2]]) > 0.0));
    }

    #[test]
    fn square_with_two_holes() {
        let hole = |x: f64| vec![[x, 1.0], [x, 2.0], [x + 1.0, 2.0], [x + 1.0, 1.0]];
        let r = Region {
            outer: vec![[0.0, 0.0], [6.0, 0.0], [6.0, 3.0], [0.0, 3.0]],
            holes: vec![hole(1.0), hole(4.0)],
        };
        let (pts, tris) = triangulate_region(&r).unwrap();
        assert!((total_area(&pts, &tris) - 16.0).abs() < 1e-12);
        assert_eq!(tris.len(), 4 + 4 + 4 + 2 * 2 - 2);
    }
}
