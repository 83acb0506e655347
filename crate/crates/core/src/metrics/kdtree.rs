use crate::geom::V3;

const LEAF: usize = 8;

#[inline]
pub fn dist_sq(a: V3, b: V3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static 3-d tree answering exact nearest-neighbor and radius queries.
/// Ties resolve to the lowest point index, matching a linear scan.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: &'a [V3],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [V3]) -> Self {
        let mut t = KdTree { points, order: (0..points.len()).collect(), nodes: Vec::new() };
        if !points.is_empty() {
            t.build(0, points.len());
        }
        t
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &mut self.order[start..end];
        let pts = self.points;
        let axis = (0..3)
            .max_by(|&a, &b| {
                let spread = |k: usize| {
                    let (lo, hi) = slice
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(pts[i][k]), hi.max(pts[i][k])));
                    hi - lo
                };
                spread(a).total_cmp(&spread(b))
            })
            .unwrap();
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b)));
        let value = pts[slice[mid]][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, start + mid);
        let right = self.build(start + mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    /// Index and squared distance of the nearest point; `None` on an empty tree.
    pub fn nearest(&self, q: V3) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_in(0, q, &mut best);
        Some(best)
    }

    fn nearest_in(&self, node: usize, q: V3, best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = dist_sq(q, self.points[i]);
                    if d < best.1 || (d == best.1 && i < best.0) {
                        *best = (i, d);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.nearest_in(near, q, best);
                // Equality keeps the far side: it may hold a lower-index tie.
                if diff * diff <= best.1 {
                    self.nearest_in(far, q, best);
                }
            }
        }
    }

    /// Indices of all points with squared distance `<= r_sq`, ascending.
    pub fn within(&self, q: V3, r_sq: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.within_in(0, q, r_sq, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_in(&self, node: usize, q: V3, r_sq: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                out.extend(self.order[start..end].iter().copied().filter(|&i| dist_sq(q, self.points[i]) <= r_sq));
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.within_in(near, q, r_sq, out);
                if diff * diff <= r_sq {
                    self.within_in(far, q, r_sq, out);
                }
            }
        }
    }
}

/// Linear-scan nearest neighbor, lowest index on ties.
pub fn nearest_brute(points: &[V3], q: V3) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in points.iter().enumerate() {
        let d = dist_sq(q, p);
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best
}
