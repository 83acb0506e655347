//! Source-to-source normalization of design histories.
//!
//! [`normalize`] runs the passes in [`PassName::DEFAULT_ORDER`]. Every pass is
//! a pure `Program -> Program` function that is also exported on its own.

mod dce;
mod equivalence;
mod queries;
mod simplify;
mod values;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Identifier, Program, Unit};
use crate::validate::{has_errors, validate_structure};

pub use dce::eliminate_dead_code;
pub use equivalence::{validate_equivalence, ValidationResult, ValidationStatus, DEFAULT_TOLERANCE};
pub use queries::{canonicalize_queries, rename_identifiers, AxisCandidate};
pub use simplify::simplify_operations;
pub use values::{explicit_sketch_params, fold_numeric_expressions, round_precision, standardize_units};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassName {
    ExplicitSketchParams,
    StandardizeUnits,
    FoldNumericExpressions,
    SimplifyOperations,
    EliminateDeadCode,
    RenameIdentifiers,
    CanonicalizeQueries,
    RoundPrecision,
}

impl PassName {
    pub const DEFAULT_ORDER: [PassName; 8] = [
        PassName::ExplicitSketchParams,
        PassName::StandardizeUnits,
        PassName::FoldNumericExpressions,
        PassName::SimplifyOperations,
        PassName::EliminateDeadCode,
        PassName::RenameIdentifiers,
        PassName::CanonicalizeQueries,
        PassName::RoundPrecision,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PassName::ExplicitSketchParams => "explicit_sketch_params",
            PassName::StandardizeUnits => "standardize_units",
            PassName::FoldNumericExpressions => "fold_numeric_expressions",
            PassName::SimplifyOperations => "simplify_operations",
            PassName::EliminateDeadCode => "eliminate_dead_code",
            PassName::RenameIdentifiers => "rename_identifiers",
            PassName::CanonicalizeQueries => "canonicalize_queries",
            PassName::RoundPrecision => "round_precision",
        }
    }
}

impl fmt::Display for PassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassConfig {
    pub precision_decimals: u32,
    pub canonical_length_unit: Unit,
    pub canonical_angle_unit: Unit,
    pub enabled_passes: Vec<PassName>,
}

impl Default for PassConfig {
    fn default() -> Self {
        PassConfig {
            precision_decimals: 2,
            canonical_length_unit: Unit::Millimeter,
            canonical_angle_unit: Unit::Degree,
            enabled_passes: PassName::DEFAULT_ORDER.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("only millimeters and degrees are supported as canonical units")]
    UnsupportedUnit,
    #[error("pass `{0}` listed twice")]
    DuplicatePass(PassName),
    #[error("pass `{0}` is out of the fixed pipeline order")]
    OutOfOrder(PassName),
}

impl PassConfig {
    /// Passes may be disabled but never reordered.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.canonical_length_unit != Unit::Millimeter || self.canonical_angle_unit != Unit::Degree {
            return Err(ConfigError::UnsupportedUnit);
        }
        let rank = |p: PassName| PassName::DEFAULT_ORDER.iter().position(|q| *q == p).expect("listed");
        for w in self.enabled_passes.windows(2) {
            if w[0] == w[1] {
                return Err(ConfigError::DuplicatePass(w[1]));
            }
            if rank(w[0]) > rank(w[1]) {
                return Err(ConfigError::OutOfOrder(w[1]));
            }
        }
        Ok(())
    }
}

/// What one pass changed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassRecord {
    pub name: String,
    pub features_changed: usize,
    /// Features plus sketch entities removed.
    pub entities_removed: usize,
    /// Only identifiers whose name changed.
    pub identifiers_renamed: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassReport {
    pub source_name: String,
    pub passes: Vec<PassRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub struct PassError {
    pub pass: String,
    pub feature: Option<Identifier>,
    pub location: Option<String>,
    pub message: String,
}

impl PassError {
    pub(crate) fn new(pass: PassName, feature: Option<&Identifier>, message: impl Into<String>) -> Self {
        PassError { pass: pass.as_str().to_string(), feature: feature.cloned(), location: None, message: message.into() }
    }

    pub(crate) fn at(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }
}

impl fmt::Display for PassError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pass)?;
        if let Some(id) = &self.feature {
            write!(f, ": feature {id}")?;
        }
        if let Some(loc) = &self.location {
            write!(f, ", {loc}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Runs a single pass and describes its effect.
pub fn run_pass(pass: PassName, program: &Program, config: &PassConfig) -> Result<(Program, PassRecord), PassError> {
    let mut record = PassRecord { name: pass.as_str().to_string(), ..Default::default() };
    let mut renames = BTreeMap::new();
    let out = match pass {
        PassName::ExplicitSketchParams => explicit_sketch_params(program)?,
        PassName::StandardizeUnits => standardize_units(program)?,
        PassName::FoldNumericExpressions => fold_numeric_expressions(program)?,
        PassName::SimplifyOperations => simplify_operations(program, config.precision_decimals),
        PassName::EliminateDeadCode => eliminate_dead_code(program)?,
        PassName::RenameIdentifiers => {
            let (p, map) = rename_identifiers(program);
            renames = map;
            p
        }
        PassName::CanonicalizeQueries => {
            let (p, notes) = canonicalize_queries(program);
            record.notes = notes;
            p
        }
        PassName::RoundPrecision => round_precision(program, config.precision_decimals),
    };
    let inverse: BTreeMap<&Identifier, &Identifier> = renames.iter().map(|(o, n)| (n, o)).collect();
    record.features_changed = out
        .features
        .iter()
        .filter(|f| {
            let old_id = inverse.get(&f.id).copied().unwrap_or(&f.id);
            program.feature(old_id) != Some(*f)
        })
        .count();
    let size = |p: &Program| p.features.iter().map(|f| 1 + f.sketch_entities().len()).sum::<usize>();
    record.entities_removed = size(program).saturating_sub(size(&out));
    record.identifiers_renamed = renames
        .into_iter()
        .filter(|(o, n)| o != n)
        .map(|(o, n)| (o.as_str().to_string(), n.as_str().to_string()))
        .collect();
    Ok((out, record))
}

/// Runs the configured pipeline. The output satisfies `validate_structure`
/// and holds only canonical literals when every pass is enabled.
pub fn normalize(program: &Program, config: &PassConfig) -> Result<(Program, PassReport), PassError> {
    config
        .check()
        .map_err(|e| PassError { pass: "normalize".into(), feature: None, location: None, message: e.to_string() })?;
    let mut current = program.clone();
    let mut report = PassReport { source_name: program.source_name.clone(), passes: Vec::new() };
    for &pass in &config.enabled_passes {
        let (next, record) = run_pass(pass, &current, config)?;
        current = next;
        report.passes.push(record);
    }
    if config.enabled_passes.len() == PassName::DEFAULT_ORDER.len() {
        let diags = validate_structure(&current);
        if has_errors(&diags) {
            let first = diags.into_iter().next().expect("non-empty");
            return Err(PassError {
                pass: "normalize".into(),
                feature: first.feature,
                location: None,
                message: format!("result is not a valid program: {}", first.message),
            });
        }
    }
    Ok((current, report))
}
