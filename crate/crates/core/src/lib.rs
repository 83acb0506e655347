//! Parsing, normalization, geometry interpretation and shape metrics for
//! CAD design histories written in a FeatureScript subset.

pub mod annotate;
pub mod ast;
pub mod eval;
pub mod geom;
pub mod graph;
pub mod metrics;
pub mod normalize;
pub mod parser;
pub mod schema;
pub mod validate;

pub use ast::{
    BinOp, BoolMode, Dimension, Disambiguation, EntityType, Expr, Feature, IdFamily, Identifier, Number, OpKind,
    ParamValue, PrimitiveFamily, Program, Query, Scalar, SketchEntity, SketchGeom, Unit, Vec2, Vec3,
};
pub use parser::{emit, parse, Dialect, ParseError};
pub use geom::{interpret, InterpretConfig, InterpretError, Mesh};
pub use normalize::{normalize, PassConfig, PassError, PassName, PassReport, ValidationResult, ValidationStatus};
pub use metrics::{evaluate_sets, EvalProtocol, MetricsReport, PointCloud};
