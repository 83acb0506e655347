use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::plane::Plane;
use super::regions::Region;
use super::triangulate::triangulate_region;
use super::{InterpretError, InterpretReason};
use crate::ast::Feature;

/// Signed offsets along the plane normal between which a region is swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrudeSpan {
    pub from: f64,
    pub to: f64,
}

impl ExtrudeSpan {
    pub fn of(feature: &Feature) -> Result<ExtrudeSpan, InterpretError> {
        let fail = |reason, msg: &str| InterpretError::new(Some(&feature.id), reason, msg);
        let num = |name: &str, default: f64| match feature.scalar(name) {
            None => Ok(default),
            Some(s) => s.to_f64().ok_or_else(|| fail(InterpretReason::UnsupportedOperation, "non-literal value")),
        };
        let depth = num("depth", 0.0)?;
        let second = num("secondDepth", 0.0)?;
        if num("draft", 0.0)? != 0.0 {
            return Err(fail(InterpretReason::UnsupportedOperation, "drafted extrusion"));
        }
        let span = if feature.flag("midplane").unwrap_or(false) {
            ExtrudeSpan { from: -depth / 2.0, to: depth / 2.0 }
        } else if feature.flag("opposite").unwrap_or(false) {
            ExtrudeSpan { from: -depth, to: second }
        } else {
            ExtrudeSpan { from: -second, to: depth }
        };
        if span.to - span.from <= 0.0 {
            return Err(fail(InterpretReason::EmptyResult, "non-positive extrusion length"));
        }
        Ok(span)
    }
}

/// Closed prism over a region: reversed bottom cap, top cap, side walls.
pub fn extrude_region(region: &Region, plane: &Plane, span: ExtrudeSpan) -> Result<Mesh, InterpretError> {
    let (pts, tris) = triangulate_region(region)?;
    let n = pts.len();
    let mut vertices = Vec::with_capacity(2 * n);
    vertices.extend(pts.iter().map(|&p| plane.point(p, span.from)));
    vertices.extend(pts.iter().map(|&p| plane.point(p, span.to)));
    let mut triangles = Vec::with_capacity(2 * tris.len() + 4 * n);
    for t in &tris {
        triangles.push([t[0], t[2], t[1]]);
        triangles.push([t[0] + n, t[1] + n, t[2] + n]);
    }
    let mut base = 0;
    for lp in std::iter::once(&region.outer).chain(&region.holes) {
        let m = lp.len();
        for k in 0..m {
            let (i, j) = (base + k, base + (k + 1) % m);
            triangles.push([i, j, j + n]);
            triangles.push([i, j + n, i + n]);
        }
        base += m;
    }
    Ok(Mesh { vertices, triangles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{check_mesh, mesh_volume};

    #[test]
    fn square_with_hole_prism() {
        let r = Region {
            outer: vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]],
            holes: vec![vec![[1.0, 1.0], [1.0, 3.0], [3.0, 3.0], [3.0, 1.0]]],
        };
        let m = extrude_region(&r, &Plane::principal("XZ").unwrap(), ExtrudeSpan { from: -1.0, to: 2.0 }).unwrap();
        check_mesh(&m).unwrap();
        assert!((mesh_volume(&m).unwrap() - 12.0 * 3.0).abs() < 1e-12);
    }
}
