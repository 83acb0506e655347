use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rust_decimal::prelude::FromPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{add, cross, dot, norm, scale, sub, V3};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<V3>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Concatenates meshes, offsetting triangle indices.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a Mesh>) -> Mesh {
        let mut out = Mesh::default();
        for m in parts {
            let base = out.vertices.len();
            out.vertices.extend_from_slice(&m.vertices);
            out.triangles.extend(m.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
        }
        out
    }

    pub fn corners(&self, t: usize) -> [V3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| triangle_area(self.corners(t))).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("empty mesh")]
    Empty,
    #[error("edge ({0}, {1}) is used by {2} triangles")]
    NonManifoldEdge(usize, usize, usize),
    #[error("edge ({0}, {1}) has inconsistent orientation")]
    Orientation(usize, usize),
    #[error("triangle {0} is degenerate")]
    Degenerate(usize),
    #[error("enclosed volume {0} is not positive")]
    NonPositiveVolume(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

pub fn triangle_area(t: [V3; 3]) -> f64 {
    0.5 * norm(cross(sub(t[1], t[0]), sub(t[2], t[0])))
}

/// Signed enclosed volume of a closed, consistently oriented mesh.
pub fn mesh_volume(mesh: &Mesh) -> Result<f64, MeshError> {
    if mesh.triangles.is_empty() {
        return Err(MeshError::Empty);
    }
    Ok((0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.corners(t);
            dot(a, cross(b, c))
        })
        .sum::<f64>()
        / 6.0)
}

/// Watertightness: every edge shared by exactly two oppositely oriented
/// triangles, no degenerate triangles, positive volume.
pub fn check_mesh(mesh: &Mesh) -> Result<(), MeshError> {
    if mesh.triangles.is_empty() {
        return Err(MeshError::Empty);
    }
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, t) in mesh.triangles.iter().enumerate() {
        if triangle_area(mesh.corners(i)) <= 1e-12 {
            return Err(MeshError::Degenerate(i));
        }
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut keys: Vec<_> = directed.keys().copied().collect();
    keys.sort_unstable();
    for (a, b) in keys {
        let fwd = directed[&(a, b)];
        let back = directed.get(&(b, a)).copied().unwrap_or(0);
        if fwd + back != 2 {
            return Err(MeshError::NonManifoldEdge(a.min(b), a.max(b), fwd + back));
        }
        if fwd != 1 {
            return Err(MeshError::Orientation(a.min(b), a.max(b)));
        }
    }
    let v = mesh_volume(mesh)?;
    if v <= 0.0 {
        return Err(MeshError::NonPositiveVolume(v));
    }
    Ok(())
}

/// Squared distance from `p` to the closest point of triangle `t`.
pub fn point_triangle_distance_sq(p: V3, t: [V3; 3]) -> f64 {
    let [a, b, c] = t;
    let (ab, ac, ap) = (sub(b, a), sub(c, a), sub(p, a));
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    let at = |q: V3| dot(sub(p, q), sub(p, q));
    if d1 <= 0.0 && d2 <= 0.0 {
        return at(a);
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return at(b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return at(add(a, scale(ab, v)));
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return at(c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return at(add(a, scale(ac, w)));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return at(add(b, scale(sub(c, b), w)));
    }
    let denom = 1.0 / (va + vb + vc);
    let (v, w) = (vb * denom, vc * denom);
    at(add(a, add(scale(ab, v), scale(ac, w))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: V3,
    pub max: V3,
}

impl BBox {
    pub fn center(&self) -> V3 {
        [0, 1, 2].map(|k| (self.min[k] + self.max[k]) / 2.0)
    }

    pub fn extent(&self) -> V3 {
        [0, 1, 2].map(|k| self.max[k] - self.min[k])
    }

    pub fn diagonal(&self) -> f64 {
        norm(self.extent())
    }

    /// True when the closed boxes share at least one point.
    pub fn touches(&self, other: &BBox) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }
}

pub fn bounding_box<'a>(meshes: impl IntoIterator<Item = &'a Mesh>) -> Option<BBox> {
    let mut it = meshes.into_iter().flat_map(|m| m.vertices.iter().copied());
    let first = it.next()?;
    Some(it.fold(BBox { min: first, max: first }, |b, v| BBox {
        min: [0, 1, 2].map(|k| b.min[k].min(v[k])),
        max: [0, 1, 2].map(|k| b.max[k].max(v[k])),
    }))
}

/// Two decimals, halves away from zero, trailing zeros trimmed to one place.
pub fn format_prompt_number(x: f64) -> String {
    let d = Decimal::from_f64(x)
        .unwrap_or_default()
        .round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero);
    let d = if d.is_zero() { Decimal::ZERO } else { d.normalize() };
    if d.scale() == 0 {
        format!("{d}.0")
    } else {
        d.to_string()
    }
}

/// Bounding-box description for prompting: corners, center and half of the largest extent.
pub fn bbox_prompt(b: &BBox) -> String {
    let t = |v: V3| v.map(format_prompt_number).join(", ");
    let e = b.extent();
    let scale = e[0].max(e[1]).max(e[2]) / 2.0;
    format!(
        "Bounds from ({}) to ({}), center = ({}), scale = {}",
        t(b.min),
        t(b.max),
        t(b.center()),
        format_prompt_number(scale)
    )
}

pub fn write_stl(mesh: &Mesh, name: &str, out: &mut impl Write) -> std::io::Result<()> {
    let mut s = format!("solid {name}\n");
    for i in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.corners(i);
        let n = cross(sub(b, a), sub(c, a));
        let l = norm(n);
        let n = if l > 0.0 { n.map(|x| x / l) } else { n };
        let _ = writeln!(s, "  facet normal {:e} {:e} {:e}\n    outer loop", n[0], n[1], n[2]);
        for v in [a, b, c] {
            let _ = writeln!(s, "      vertex {:e} {:e} {:e}", v[0], v[1], v[2]);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(s, "endsolid {name}");
    out.write_all(s.as_bytes())
}

pub fn write_obj(mesh: &Mesh, out: &mut impl Write) -> std::io::Result<()> {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out.write_all(s.as_bytes())
}

/// Reads `v` and `f` records; polygons are fanned into triangles.
pub fn read_obj(input: impl BufRead) -> Result<Mesh, MeshError> {
    let mut mesh = Mesh::default();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| MeshError::Io(e.to_string()))?;
        let bad = |message: String| MeshError::Parse { line: n + 1, message };
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|e| bad(format!("bad coordinate `{s}`: {e}"))))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(bad("vertex needs three coordinates".into()));
                }
                mesh.vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|_| bad(format!("bad face index `{s}`")))?;
                        let resolved = if i < 0 { mesh.vertices.len() as i64 + i } else { i - 1 };
                        if resolved < 0 || resolved as usize >= mesh.vertices.len() {
                            return Err(bad(format!("face index {i} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(bad("face needs three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(mesh)
}
