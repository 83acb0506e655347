use serde::{Deserialize, Serialize};

use super::{add, cross, scale, InterpretError, InterpretReason, V2, V3};
use crate::ast::{Feature, OpKind, ParamValue, Program};

/// Right-handed frame: `x_axis × y_axis = normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub origin: V3,
    pub normal: V3,
    pub x_axis: V3,
}

impl Plane {
    pub fn principal(name: &str) -> Option<Plane> {
        let (x, n) = match name {
            "XY" => ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            "XZ" => ([1.0, 0.0, 0.0], [0.0, -1.0, 0.0]),
            "YZ" => ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
            _ => return None,
        };
        Some(Plane { origin: [0.0; 3], normal: n, x_axis: x })
    }

    pub fn y_axis(&self) -> V3 {
        cross(self.normal, self.x_axis)
    }

    /// Point at in-plane coordinates `uv`, offset `t` along the normal.
    pub fn point(&self, uv: V2, t: f64) -> V3 {
        let y = self.y_axis();
        add(add(add(self.origin, scale(self.x_axis, uv[0])), scale(y, uv[1])), scale(self.normal, t))
    }
}

fn scalar_or(f: &Feature, name: &str, default: f64) -> f64 {
    f.scalar(name).and_then(|s| s.to_f64()).unwrap_or(default)
}

fn construction_plane(f: &Feature) -> Result<Plane, InterpretError> {
    let base = f.text("base").unwrap_or("XY");
    let p = Plane::principal(base).ok_or_else(|| {
        InterpretError::new(Some(&f.id), InterpretReason::UnsupportedOperation, format!("unknown base plane `{base}`"))
    })?;
    let (s, c) = scalar_or(f, "angle", 0.0).to_radians().sin_cos();
    let y = p.y_axis();
    // Tilt about the base x axis, then offset along the tilted normal.
    let normal = add(scale(p.normal, c), scale(y, -s));
    let offset = scalar_or(f, "offset", 0.0);
    Ok(Plane { origin: scale(normal, offset), normal, x_axis: p.x_axis })
}

/// Frame of a sketch or construction plane feature.
pub fn resolve_plane(feature: &Feature, program: &Program) -> Result<Plane, InterpretError> {
    let unsupported = |msg: String| InterpretError::new(Some(&feature.id), InterpretReason::UnsupportedOperation, msg);
    match feature.kind {
        OpKind::ConstructionPlane => construction_plane(feature),
        OpKind::Sketch => match feature.param("plane") {
            None => Ok(Plane::principal("XY").expect("principal")),
            Some(ParamValue::Text(name)) => {
                Plane::principal(name).ok_or_else(|| unsupported(format!("unknown plane `{name}`")))
            }
            Some(ParamValue::Query(q)) => match program.feature(&q.op_id) {
                Some(target) if target.kind == OpKind::ConstructionPlane && q.disambiguation.is_empty() => {
                    construction_plane(target).map_err(|e| e.with_feature(&feature.id))
                }
                _ => Err(unsupported(format!("sketch plane must be a construction plane, got {}", q.op_id))),
            },
            Some(_) => Err(unsupported("malformed plane parameter".into())),
        },
        other => Err(unsupported(format!("{other} does not define a plane"))),
    }
}
