use std::fmt;

use serde::{Deserialize, Serialize};

use super::{normalize, PassConfig, PassName};
use crate::ast::{BoolMode, Identifier, OpKind, PrimitiveFamily, Program};
use crate::geom::{bounding_box, interpret_meshes, point_triangle_distance_sq, triangle_area, InterpretConfig, Mesh};
use crate::parser::emit;

/// Relative chamfer bound for geometric equivalence.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidationStatus {
    VerifiedGeometric,
    VerifiedStructural,
    Failed,
}

impl fmt::Display for ValidationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationStatus::VerifiedGeometric => "verified-geometric",
            ValidationStatus::VerifiedStructural => "verified-structural",
            ValidationStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub status: ValidationStatus,
    /// Relative chamfer distance, when both programs were interpreted.
    pub chamfer_to_original: Option<f64>,
    pub reason: Option<String>,
    /// "geometric" or "structural".
    pub mode: String,
}

impl ValidationResult {
    fn failed(mode: &str, reason: impl Into<String>) -> Self {
        ValidationResult {
            status: ValidationStatus::Failed,
            chamfer_to_original: None,
            reason: Some(reason.into()),
            mode: mode.into(),
        }
    }
}

fn in_geometric_subset(p: &Program) -> bool {
    p.features.iter().all(|f| {
        let kind_ok = matches!(
            f.kind,
            OpKind::Sketch | OpKind::ConstructionPlane | OpKind::Extrude | OpKind::DeleteBody | OpKind::Boolean(BoolMode::Union)
        );
        kind_ok
            && f.sketch_entities()
                .iter()
                .all(|e| matches!(e.geom.family(), PrimitiveFamily::Line | PrimitiveFamily::Circle | PrimitiveFamily::Arc))
    })
}

/// Deterministic area-weighted surface samples: four interior points per triangle.
fn surface_samples(m: &Mesh) -> Vec<([f64; 3], f64)> {
    const BARY: [[f64; 3]; 4] = [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ];
    let mut out = Vec::with_capacity(4 * m.triangles.len());
    for t in 0..m.triangles.len() {
        let c = m.corners(t);
        let w = triangle_area(c) / 4.0;
        for b in BARY {
            let p = [0, 1, 2].map(|k| b[0] * c[0][k] + b[1] * c[1][k] + b[2] * c[2][k]);
            out.push((p, w));
        }
    }
    out
}

/// Area-weighted mean squared distance from `a`'s surface to `b`.
fn directed_mean_sq(a: &Mesh, b: &Mesh) -> f64 {
    let samples = surface_samples(a);
    let tris: Vec<[[f64; 3]; 3]> = (0..b.triangles.len()).map(|t| b.corners(t)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (p, w) in samples {
        let d = tris.iter().map(|&t| point_triangle_distance_sq(p, t)).fold(f64::INFINITY, f64::min);
        num += w * d;
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Symmetric surface chamfer divided by the reference bounding-box diagonal.
pub(crate) fn relative_chamfer(reference: &Mesh, other: &Mesh) -> f64 {
    let diag = bounding_box([reference]).map(|b| b.diagonal()).unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let d = directed_mean_sq(reference, other).max(directed_mean_sq(other, reference));
    d.sqrt() / diag
}

/// Text of each feature with all identifiers erased, sorted.
fn structure(p: &Program) -> Vec<String> {
    let blank = Identifier::new("_");
    let mut out: Vec<String> = p
        .features
        .iter()
        .map(|f| {
            let mut f = f.clone();
            f.id = blank.clone();
            if let Some(es) = f.sketch_entities_mut() {
                for e in es {
                    e.id = blank.clone();
                }
            }
            f.for_each_query_mut(&mut |q| q.op_id = blank.clone());
            emit(&Program::new("", vec![f]))
        })
        .collect();
    out.sort();
    out
}

/// Checks that `normalized` describes the same design as `raw`.
///
/// Inside the sketch/extrude subset both are interpreted and compared by
/// relative chamfer distance; otherwise the normalized pipeline output of
/// `raw` is compared feature by feature with identifiers erased.
pub fn validate_equivalence(raw: &Program, normalized: &Program, tolerance: f64) -> ValidationResult {
    let prepare = PassConfig {
        enabled_passes: vec![
            PassName::ExplicitSketchParams,
            PassName::StandardizeUnits,
            PassName::FoldNumericExpressions,
            PassName::RoundPrecision,
        ],
        ..PassConfig::default()
    };
    let prepared = match normalize(raw, &prepare) {
        Ok((p, _)) => p,
        Err(e) => return ValidationResult::failed("structural", format!("raw program does not evaluate: {e}")),
    };
    if in_geometric_subset(&prepared) && in_geometric_subset(normalized) {
        let cfg = InterpretConfig::default();
        let original = match interpret_meshes(&prepared, &cfg) {
            Ok(m) => m,
            Err(e) => return ValidationResult::failed("geometric", format!("raw program does not construct: {e}")),
        };
        let result = match interpret_meshes(normalized, &cfg) {
            Ok(m) => m,
            Err(e) => return ValidationResult::failed("geometric", format!("normalized program does not construct: {e}")),
        };
        let d = relative_chamfer(&original, &result);
        let ok = d <= tolerance;
        return ValidationResult {
            status: if ok { ValidationStatus::VerifiedGeometric } else { ValidationStatus::Failed },
            chamfer_to_original: Some(d),
            reason: (!ok).then(|| format!("relative chamfer {d:e} exceeds {tolerance:e}")),
            mode: "geometric".into(),
        };
    }
    let expected = match normalize(raw, &PassConfig::default()) {
        Ok((p, _)) => p,
        Err(e) => return ValidationResult::failed("structural", format!("raw program does not normalize: {e}")),
    };
    if structure(&expected) == structure(normalized) {
        ValidationResult {
            status: ValidationStatus::VerifiedStructural,
            chamfer_to_original: None,
            reason: None,
            mode: "structural".into(),
        }
    } else {
        ValidationResult::failed("structural", "feature structure differs from the raw program")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, Dialect};

    const RAW: &str = "opSketch(base, entities = [\n\
        line(a, start = (0, 0), end = (1 inch, 0)),\n\
        line(b, start = (1 inch, 0), end = (1 inch, 1 inch)),\n\
        line(c, start = (1 inch, 1 inch), end = (0, 1 inch)),\n\
        line(d, start = (0, 1 inch), end = (0, 0)),\n\
        circle(unused, center = (50, 50), radius = 2),\n]);\n\
        opExtrude(body, profile = [makeQuery(base, SKETCH_REGION, FACE, [original([makeQuery(a, SKETCH_EDGE, EDGE, []), makeQuery(b, SKETCH_EDGE, EDGE, []), makeQuery(c, SKETCH_EDGE, EDGE, []), makeQuery(d, SKETCH_EDGE, EDGE, [])])])], depth = 5 + 5);\n";

    #[test]
    fn normalized_square_is_geometrically_equivalent() {
        let raw = parse(RAW, Dialect::Raw).unwrap();
        let (norm, _) = normalize(&raw, &PassConfig::default()).unwrap();
        let r = validate_equivalence(&raw, &norm, DEFAULT_TOLERANCE);
        assert_eq!(r.status, ValidationStatus::VerifiedGeometric, "{r:?}");
        assert!(r.chamfer_to_original.unwrap() <= 1e-12);
    }

    #[test]
    fn shifted_result_fails() {
        let raw = parse(RAW, Dialect::Raw).unwrap();
        let (mut norm, _) = normalize(&raw, &PassConfig::default()).unwrap();
        let text = emit(&norm).replace("depth = 10.00", "depth = 11.00");
        norm = parse(&text, Dialect::Canonical).unwrap();
        let r = validate_equivalence(&raw, &norm, DEFAULT_TOLERANCE);
        assert_eq!(r.status, ValidationStatus::Failed);
        assert!(r.chamfer_to_original.unwrap() > 1e-3);
    }

    #[test]
    fn open_raw_profile_fails() {
        let raw = parse(
            "opSketch(s, entities = [line(a, start = (0, 0), end = (1, 0)), line(b, start = (1, 0), end = (1, 1))]);\n\
             opExtrude(e, profile = [makeQuery(s, SKETCH_REGION, FACE, [])], depth = 1);\n",
            Dialect::Raw,
        )
        .unwrap();
        let (norm, _) = normalize(&raw, &PassConfig::default()).unwrap();
        let r = validate_equivalence(&raw, &norm, DEFAULT_TOLERANCE);
        assert_eq!(r.status, ValidationStatus::Failed);
        assert!(r.reason.unwrap().contains("open-profile"));
    }

    #[test]
    fn fillet_programs_use_structural_mode() {
        let raw = parse(
            "opSketch(s, entities = [circle(c, center = (0, 0), radius = 1)]);\n\
             opExtrude(e, profile = [makeQuery(s, SKETCH_REGION, FACE, [])], depth = 1);\n\
             opFillet(f, entities = [makeQuery(e, SWEPT_EDGE, EDGE, [])], radius = 0.1 inch);\n",
            Dialect::Raw,
        )
        .unwrap();
        let (norm, _) = normalize(&raw, &PassConfig::default()).unwrap();
        let r = validate_equivalence(&raw, &norm, DEFAULT_TOLERANCE);
        assert_eq!((r.status, r.mode.as_str()), (ValidationStatus::VerifiedStructural, "structural"));
    }
}
