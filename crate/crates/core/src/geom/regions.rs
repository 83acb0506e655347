use serde::{Deserialize, Serialize};

use super::triangulate::polygon_area;
use super::{orient, InterpretError, InterpretReason, V2};
use crate::ast::{Feature, SketchEntity, SketchGeom, Vec2};

pub const DEFAULT_SEGMENTS_PER_CIRCLE: usize = 64;
/// Endpoints closer than this (mm) are the same sketch vertex.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;

/// Outer loop counter-clockwise, holes clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub outer: Vec<V2>,
    pub holes: Vec<Vec<V2>>,
}

impl Region {
    pub fn area(&self) -> f64 {
        polygon_area(&self.outer) + self.holes.iter().map(|h| polygon_area(h)).sum::<f64>()
    }
}

fn err(reason: InterpretReason, msg: impl Into<String>) -> InterpretError {
    InterpretError::new(None, reason, msg)
}

fn v2(v: &Vec2) -> Result<V2, InterpretError> {
    v.to_f64().ok_or_else(|| err(InterpretReason::UnsupportedOperation, "non-literal coordinate"))
}

fn circle(c: V2, r: f64, n: usize) -> Vec<V2> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            [c[0] + r * a.cos(), c[1] + r * a.sin()]
        })
        .collect()
}

/// Polyline through an arc's three points with exact endpoints.
fn arc(a: V2, m: V2, b: V2, segments_per_circle: usize) -> Result<Vec<V2>, InterpretError> {
    let d = 2.0 * orient(a, m, b);
    if d.abs() < 1e-15 {
        return Err(err(InterpretReason::EmptyResult, "collinear arc points"));
    }
    let sq = |p: V2| p[0] * p[0] + p[1] * p[1];
    let cx = (sq(a) * (m[1] - b[1]) + sq(m) * (b[1] - a[1]) + sq(b) * (a[1] - m[1])) / d;
    let cy = (sq(a) * (b[0] - m[0]) + sq(m) * (a[0] - b[0]) + sq(b) * (m[0] - a[0])) / d;
    let r = ((a[0] - cx).powi(2) + (a[1] - cy).powi(2)).sqrt();
    let ang = |p: V2| (p[1] - cy).atan2(p[0] - cx);
    let (a0, am, a1) = (ang(a), ang(m), ang(b));
    let tau = std::f64::consts::TAU;
    let ccw = |from: f64, to: f64| (to - from).rem_euclid(tau);
    // Counter-clockwise iff the mid point is met before the end point.
    let sweep = if ccw(a0, am) < ccw(a0, a1) { ccw(a0, a1) } else { -ccw(a1, a0) };
    let n = ((segments_per_circle as f64 * sweep.abs() / tau).ceil() as usize).max(2);
    let mut pts = vec![a];
    for k in 1..n {
        let t = a0 + sweep * k as f64 / n as f64;
        pts.push([cx + r * t.cos(), cy + r * t.sin()]);
    }
    pts.push(b);
    Ok(pts)
}

enum Curve {
    Closed(Vec<V2>),
    Open(Vec<V2>),
}

fn discretize(e: &SketchEntity, segments: usize) -> Result<Curve, InterpretError> {
    Ok(match &e.geom {
        SketchGeom::Line { start, end } => Curve::Open(vec![v2(start)?, v2(end)?]),
        SketchGeom::Circle { center, radius } => {
            let r = radius.to_f64().ok_or_else(|| err(InterpretReason::UnsupportedOperation, "non-literal radius"))?;
            Curve::Closed(circle(v2(center)?, r, segments))
        }
        SketchGeom::Arc { start, mid, end } => Curve::Open(arc(v2(start)?, v2(mid)?, v2(end)?, segments)?),
        other => {
            return Err(err(
                InterpretReason::UnsupportedOperation,
                format!("{:?} entities are outside the interpreter subset", other.family()),
            ))
        }
    })
}

fn close(a: V2, b: V2) -> bool {
    (a[0] - b[0]).hypot(a[1] - b[1]) <= ENDPOINT_TOLERANCE
}

/// Chains open polylines into closed loops; every vertex must join exactly two curves.
fn chain(open: Vec<Vec<V2>>) -> Result<Vec<Vec<V2>>, InterpretError> {
    let mut nodes: Vec<V2> = Vec::new();
    let mut node_of = |p: V2| -> usize {
        match nodes.iter().position(|&q| close(p, q)) {
            Some(i) => i,
            None => {
                nodes.push(p);
                nodes.len() - 1
            }
        }
    };
    let ends: Vec<[usize; 2]> = open.iter().map(|c| [node_of(c[0]), node_of(*c.last().unwrap())]).collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (c, [s, e]) in ends.iter().enumerate() {
        incident[*s].push(c);
        incident[*e].push(c);
    }
    if let Some((n, inc)) = incident.iter().enumerate().find(|(_, inc)| inc.len() != 2) {
        let p = nodes[n];
        let reason = if inc.len() < 2 { InterpretReason::OpenProfile } else { InterpretReason::SelfIntersectingProfile };
        return Err(err(reason, format!("{} curve ends meet at ({:.6}, {:.6})", inc.len(), p[0], p[1])));
    }
    let mut used = vec![false; open.len()];
    let mut loops = Vec::new();
    for start in 0..open.len() {
        if used[start] {
            continue;
        }
        let mut pts: Vec<V2> = Vec::new();
        let (mut c, mut forward) = (start, true);
        let first = ends[start][0];
        loop {
            used[c] = true;
            let mut seg = open[c].clone();
            if !forward {
                seg.reverse();
            }
            pts.extend_from_slice(&seg[..seg.len() - 1]);
            let at = if forward { ends[c][1] } else { ends[c][0] };
            if at == first {
                break;
            }
            let next = incident[at].iter().copied().find(|&k| k != c || ends[c][0] == ends[c][1]).unwrap();
            if used[next] {
                break;
            }
            forward = ends[next][0] == at;
            c = next;
        }
        loops.push(pts);
    }
    Ok(loops)
}

fn segments_cross(p1: V2, p2: V2, q1: V2, q2: V2) -> bool {
    let scale = [p1, p2, q1, q2].iter().flat_map(|p| p.iter()).fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-12 * scale * scale;
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    let on = |a: V2, b: V2, p: V2| {
        p[0] >= a[0].min(b[0]) - 1e-12 * scale
            && p[0] <= a[0].max(b[0]) + 1e-12 * scale
            && p[1] >= a[1].min(b[1]) - 1e-12 * scale
            && p[1] <= a[1].max(b[1]) + 1e-12 * scale
    };
    if ((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps)) && ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps)) {
        return true;
    }
    (o1.abs() <= eps && on(p1, p2, q1))
        || (o2.abs() <= eps && on(p1, p2, q2))
        || (o3.abs() <= eps && on(q1, q2, p1))
        || (o4.abs() <= eps && on(q1, q2, p2))
}

fn check_simple(loops: &[Vec<V2>]) -> Result<(), InterpretError> {
    let mut segs: Vec<(usize, usize, V2, V2, [f64; 4])> = Vec::new();
    for (l, pts) in loops.iter().enumerate() {
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            let bb = [a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1])];
            segs.push((l, i, a, b, bb));
        }
    }
    for x in 0..segs.len() {
        for y in x + 1..segs.len() {
            let (la, ia, a1, a2, ba) = segs[x];
            let (lb, ib, b1, b2, bb) = segs[y];
            if ba[1] < bb[0] - 1e-9 || bb[1] < ba[0] - 1e-9 || ba[3] < bb[2] - 1e-9 || bb[3] < ba[2] - 1e-9 {
                continue;
            }
            if la == lb {
                let n = loops[la].len();
                if (ia + 1) % n == ib || (ib + 1) % n == ia {
                    continue;
                }
            }
            if segments_cross(a1, a2, b1, b2) {
                return Err(err(InterpretReason::SelfIntersectingProfile, "profile curves cross"));
            }
        }
    }
    Ok(())
}

fn inside(p: V2, poly: &[V2]) -> bool {
    let mut c = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + n - 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            c = !c;
        }
    }
    c
}

/// Regions formed by the given entities, outer loops in curve order.
pub fn build_regions_from(entities: &[&SketchEntity], segments_per_circle: usize) -> Result<Vec<Region>, InterpretError> {
    let mut loops = Vec::new();
    let mut open = Vec::new();
    for e in entities {
        match discretize(e, segments_per_circle)? {
            Curve::Closed(l) => loops.push(l),
            Curve::Open(c) => open.push(c),
        }
    }
    loops.extend(chain(open)?);
    if loops.is_empty() {
        return Err(err(InterpretReason::EmptyResult, "profile has no curves"));
    }
    if loops.iter().any(|l| l.len() < 3 || polygon_area(l).abs() <= 1e-12) {
        return Err(err(InterpretReason::SelfIntersectingProfile, "degenerate loop"));
    }
    check_simple(&loops)?;

    let depth: Vec<usize> = (0..loops.len())
        .map(|i| (0..loops.len()).filter(|&j| j != i && inside(loops[i][0], &loops[j])).count())
        .collect();
    let mut regions: Vec<(usize, Region)> = Vec::new();
    for (i, l) in loops.iter().enumerate() {
        if depth[i] % 2 == 0 {
            let mut outer = l.clone();
            if polygon_area(&outer) < 0.0 {
                outer.reverse();
            }
            regions.push((i, Region { outer, holes: Vec::new() }));
        }
    }
    for (i, l) in loops.iter().enumerate() {
        if depth[i] % 2 == 1 {
            let parent = (0..loops.len())
                .filter(|&j| depth[j] + 1 == depth[i] && inside(l[0], &loops[j]))
                .min()
                .expect("odd depth has an enclosing loop");
            let mut hole = l.clone();
            if polygon_area(&hole) > 0.0 {
                hole.reverse();
            }
            let r = regions.iter_mut().find(|(k, _)| *k == parent).expect("parent is outer");
            r.1.holes.push(hole);
        }
    }
    Ok(regions.into_iter().map(|(_, r)| r).collect())
}

/// Regions formed by all entities of a sketch.
pub fn build_regions(sketch: &Feature, segments_per_circle: usize) -> Result<Vec<Region>, InterpretError> {
    let entities: Vec<&SketchEntity> = sketch.sketch_entities().iter().collect();
    build_regions_from(&entities, segments_per_circle).map_err(|e| e.with_feature(&sketch.id))
}
