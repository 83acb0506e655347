use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::geom::{bounding_box, BBox, Mesh, V3};

/// Points with unit normals aligned by index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<V3>,
    pub normals: Vec<V3>,
}

impl PointCloud {
    pub fn new(points: Vec<V3>, normals: Vec<V3>) -> Result<Self, MetricsError> {
        if points.is_empty() {
            return Err(MetricsError::EmptyCloud);
        }
        if points.len() != normals.len() {
            return Err(MetricsError::Invalid(format!("{} points but {} normals", points.len(), normals.len())));
        }
        if let Some(i) = normals.iter().position(|n| (n[0] * n[0] + n[1] * n[1] + n[2] * n[2] - 1.0).abs() > 2e-9) {
            return Err(MetricsError::Invalid(format!("normal {i} is not unit length")));
        }
        Ok(PointCloud { points, normals })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox(&self) -> Option<BBox> {
        let m = Mesh { vertices: self.points.clone(), triangles: Vec::new() };
        bounding_box([&m])
    }

    pub fn subset(&self, idx: &[usize]) -> PointCloud {
        PointCloud {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            normals: idx.iter().map(|&i| self.normals[i]).collect(),
        }
    }
}

/// Seeded generator for one (stream, index) pair; streams never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Area-weighted uniform samples with per-triangle normals.
pub fn sample_surface(mesh: &Mesh, n: usize, seed: u64) -> Result<PointCloud, MetricsError> {
    if n == 0 {
        return Err(MetricsError::Invalid("sample count must be positive".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut normals = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.corners(t);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cr = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        let len = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
        total += len / 2.0;
        cumulative.push(total);
        normals.push(if len > 0.0 { cr.map(|x| x / len) } else { [0.0, 0.0, 1.0] });
    }
    if total <= 0.0 {
        return Err(MetricsError::Invalid("mesh has zero surface area".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PointCloud { points: Vec::with_capacity(n), normals: Vec::with_capacity(n) };
    for _ in 0..n {
        let x: f64 = rng.gen::<f64>() * total;
        let t = cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1);
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let s = r1.sqrt();
        let (wa, wb, wc) = (1.0 - s, s * (1.0 - r2), s * r2);
        let [a, b, c] = mesh.corners(t);
        out.points.push([0, 1, 2].map(|k| wa * a[k] + wb * b[k] + wc * c[k]));
        out.normals.push(normals[t]);
    }
    Ok(out)
}

/// Affine map sending the reference box center to the origin and its
/// largest extent to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitTransform {
    pub center: V3,
    pub scale: f64,
}

impl UnitTransform {
    pub fn of(reference: &BBox) -> Result<Self, MetricsError> {
        let e = reference.extent();
        let m = e[0].max(e[1]).max(e[2]);
        if !(m > 0.0) {
            return Err(MetricsError::Invalid("reference bounding box has zero extent".into()));
        }
        Ok(UnitTransform { center: reference.center(), scale: 1.0 / m })
    }

    pub fn apply(&self, p: V3) -> V3 {
        [0, 1, 2].map(|k| (p[k] - self.center[k]) * self.scale)
    }
}

pub fn unit_normalize(cloud: &PointCloud, reference: &BBox) -> Result<PointCloud, MetricsError> {
    let t = UnitTransform::of(reference)?;
    Ok(PointCloud { points: cloud.points.iter().map(|&p| t.apply(p)).collect(), normals: cloud.normals.clone() })
}

pub fn unit_normalize_mesh(mesh: &Mesh, reference: &BBox) -> Result<Mesh, MetricsError> {
    let t = UnitTransform::of(reference)?;
    Ok(Mesh { vertices: mesh.vertices.iter().map(|&p| t.apply(p)).collect(), triangles: mesh.triangles.clone() })
}

/// Six whitespace-separated columns per line: position then normal.
pub fn write_xyz(cloud: &PointCloud, out: &mut impl Write) -> std::io::Result<()> {
    let mut s = String::with_capacity(cloud.len() * 64);
    for (p, n) in cloud.points.iter().zip(&cloud.normals) {
        s.push_str(&format!("{} {} {} {} {} {}\n", p[0], p[1], p[2], n[0], n[1], n[2]));
    }
    out.write_all(s.as_bytes())
}

pub fn read_xyz(input: impl BufRead) -> Result<PointCloud, MetricsError> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| MetricsError::Io(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| MetricsError::Invalid(format!("line {}: {e}", k + 1)))?;
        if v.len() != 6 {
            return Err(MetricsError::Invalid(format!("line {}: expected 6 columns, found {}", k + 1, v.len())));
        }
        points.push([v[0], v[1], v[2]]);
        normals.push([v[3], v[4], v[5]]);
    }
    PointCloud::new(points, normals)
}
