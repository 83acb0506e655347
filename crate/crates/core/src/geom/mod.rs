//! Sketch + extrude geometry interpreter producing watertight triangle meshes.

mod extrude;
mod interpret;
mod mesh;
mod plane;
mod regions;
mod triangulate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Identifier;

pub use extrude::{extrude_region, ExtrudeSpan};
pub use interpret::{interpret, interpret_meshes, Body, InterpretConfig};
pub use mesh::{
    bbox_prompt, bounding_box, check_mesh, format_prompt_number, mesh_volume, point_triangle_distance_sq, read_obj, triangle_area, write_obj,
    write_stl, BBox, Mesh, MeshError,
};
pub use plane::{resolve_plane, Plane};
pub use regions::{build_regions, build_regions_from, Region, DEFAULT_SEGMENTS_PER_CIRCLE, ENDPOINT_TOLERANCE};
pub use triangulate::{polygon_area, triangulate_region};

pub type V2 = [f64; 2];
pub type V3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpretReason {
    UnsupportedOperation,
    OpenProfile,
    SelfIntersectingProfile,
    EmptyResult,
}

impl InterpretReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InterpretReason::UnsupportedOperation => "unsupported-operation",
            InterpretReason::OpenProfile => "open-profile",
            InterpretReason::SelfIntersectingProfile => "self-intersecting-profile",
            InterpretReason::EmptyResult => "empty-result",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub struct InterpretError {
    pub feature: Option<Identifier>,
    pub reason: InterpretReason,
    pub detail: String,
}

impl InterpretError {
    pub fn new(feature: Option<&Identifier>, reason: InterpretReason, detail: impl Into<String>) -> Self {
        InterpretError { feature: feature.cloned(), reason, detail: detail.into() }
    }

    pub(crate) fn with_feature(mut self, id: &Identifier) -> Self {
        if self.feature.is_none() {
            self.feature = Some(id.clone());
        }
        self
    }
}

impl fmt::Display for InterpretError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.feature {
            Some(id) => write!(f, "{}({id}): {}", self.reason.as_str(), self.detail),
            None => write!(f, "{}: {}", self.reason.as_str(), self.detail),
        }
    }
}

pub(crate) fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: V3, k: f64) -> V3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

pub(crate) fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

/// Twice the signed area of the 2D triangle `abc`.
pub(crate) fn orient(a: V2, b: V2, c: V2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}
