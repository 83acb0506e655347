use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::extrude::{extrude_region, ExtrudeSpan};
use super::mesh::{bounding_box, check_mesh, Mesh};
use super::plane::{resolve_plane, Plane};
use super::regions::{build_regions_from, DEFAULT_SEGMENTS_PER_CIRCLE};
use super::{InterpretError, InterpretReason};
use crate::ast::{BoolMode, Disambiguation, EntityType, Feature, Identifier, OpKind, Program, Query, SketchEntity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpretConfig {
    pub segments_per_circle: usize,
}

impl Default for InterpretConfig {
    fn default() -> Self {
        InterpretConfig { segments_per_circle: DEFAULT_SEGMENTS_PER_CIRCLE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Body {
    /// Feature that created the body.
    pub source: Identifier,
    /// Features whose BODY queries select this body.
    pub aliases: BTreeSet<Identifier>,
    pub mesh: Mesh,
}

struct State<'a> {
    program: &'a Program,
    config: InterpretConfig,
    planes: BTreeMap<Identifier, Plane>,
    bodies: Vec<Body>,
}

impl<'a> State<'a> {
    fn profile_entities(&self, f: &Feature, q: &Query) -> Result<(Plane, Vec<&'a SketchEntity>), InterpretError> {
        let unsupported = |msg: String| InterpretError::new(Some(&f.id), InterpretReason::UnsupportedOperation, msg);
        let sketch = self
            .program
            .feature(&q.op_id)
            .filter(|s| s.kind == OpKind::Sketch && q.entity_type == EntityType::Face)
            .ok_or_else(|| unsupported(format!("profile must be a sketch region, got {}", q.op_id)))?;
        let plane = *self.planes.get(&sketch.id).ok_or_else(|| unsupported(format!("no plane for {}", sketch.id)))?;
        let all = sketch.sketch_entities();
        match q.disambiguation.as_slice() {
            [] => Ok((plane, all.iter().collect())),
            [Disambiguation::OriginalSet(named)] => {
                let mut picked = Vec::new();
                for n in named {
                    let e = all
                        .iter()
                        .find(|e| e.id == n.op_id)
                        .ok_or_else(|| unsupported(format!("{} is not an entity of {}", n.op_id, sketch.id)))?;
                    picked.push(e);
                }
                Ok((plane, picked))
            }
            _ => Err(unsupported("topological profile selection".into())),
        }
    }

    fn select(&self, f: &Feature, param: &str) -> Result<Vec<usize>, InterpretError> {
        let mut out = BTreeSet::new();
        for q in f.param(param).map(|v| v.queries()).unwrap_or_default() {
            if q.entity_type != EntityType::Body || !q.disambiguation.is_empty() {
                return Err(InterpretError::new(
                    Some(&f.id),
                    InterpretReason::UnsupportedOperation,
                    format!("`{param}` must select whole bodies"),
                ));
            }
            let hits: Vec<usize> = (0..self.bodies.len()).filter(|&b| self.bodies[b].aliases.contains(&q.op_id)).collect();
            if hits.is_empty() {
                return Err(InterpretError::new(
                    Some(&f.id),
                    InterpretReason::EmptyResult,
                    format!("query on {} selects no body", q.op_id),
                ));
            }
            out.extend(hits);
        }
        Ok(out.into_iter().collect())
    }

    fn extrude(&mut self, f: &Feature) -> Result<(), InterpretError> {
        let span = ExtrudeSpan::of(f)?;
        let profiles = f.param("profile").map(|v| v.queries()).unwrap_or_default();
        if profiles.is_empty() {
            return Err(InterpretError::new(Some(&f.id), InterpretReason::EmptyResult, "empty profile"));
        }
        for q in profiles {
            let (plane, entities) = self.profile_entities(f, q)?;
            let regions = build_regions_from(&entities, self.config.segments_per_circle).map_err(|e| e.with_feature(&f.id))?;
            for r in regions {
                let mesh = extrude_region(&r, &plane, span).map_err(|e| e.with_feature(&f.id))?;
                check_mesh(&mesh)
                    .map_err(|e| InterpretError::new(Some(&f.id), InterpretReason::EmptyResult, e.to_string()))?;
                self.bodies.push(Body { source: f.id.clone(), aliases: BTreeSet::from([f.id.clone()]), mesh });
            }
        }
        Ok(())
    }

    fn union(&mut self, f: &Feature) -> Result<(), InterpretError> {
        let mut picked = self.select(f, "targets")?;
        picked.extend(self.select(f, "tools")?);
        picked.sort_unstable();
        picked.dedup();
        let boxes: Vec<_> = picked.iter().map(|&b| bounding_box([&self.bodies[b].mesh]).expect("non-empty body")).collect();
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].touches(&boxes[j]) {
                    return Err(InterpretError::new(
                        Some(&f.id),
                        InterpretReason::UnsupportedOperation,
                        "overlapping union",
                    ));
                }
            }
        }
        let mut aliases = BTreeSet::from([f.id.clone()]);
        for &b in &picked {
            aliases.extend(self.bodies[b].aliases.iter().cloned());
        }
        let mesh = Mesh::merge(picked.iter().map(|&b| &self.bodies[b].mesh));
        let mut k = 0;
        self.bodies.retain(|_| {
            k += 1;
            !picked.contains(&(k - 1))
        });
        self.bodies.push(Body { source: f.id.clone(), aliases, mesh });
        Ok(())
    }

    fn step(&mut self, f: &Feature) -> Result<(), InterpretError> {
        match f.kind {
            OpKind::Sketch | OpKind::ConstructionPlane => {
                let plane = resolve_plane(f, self.program)?;
                self.planes.insert(f.id.clone(), plane);
                Ok(())
            }
            OpKind::Extrude => self.extrude(f),
            OpKind::Boolean(BoolMode::Union) if !f.flag("keepTools").unwrap_or(false) => self.union(f),
            OpKind::DeleteBody => {
                let doomed = self.select(f, "entities")?;
                let mut k = 0;
                self.bodies.retain(|_| {
                    k += 1;
                    !doomed.contains(&(k - 1))
                });
                Ok(())
            }
            other => Err(InterpretError::new(
                Some(&f.id),
                InterpretReason::UnsupportedOperation,
                format!("{other} is outside the interpreter subset"),
            )),
        }
    }
}

/// Replays a sketch/extrude history into closed bodies.
pub fn interpret(program: &Program, config: &InterpretConfig) -> Result<Vec<Body>, InterpretError> {
    let mut st = State { program, config: *config, planes: BTreeMap::new(), bodies: Vec::new() };
    for f in &program.features {
        st.step(f)?;
    }
    if st.bodies.is_empty() {
        return Err(InterpretError::new(None, InterpretReason::EmptyResult, "no bodies remain"));
    }
    Ok(st.bodies)
}

/// All surviving bodies as one mesh.
pub fn interpret_meshes(program: &Program, config: &InterpretConfig) -> Result<Mesh, InterpretError> {
    let bodies = interpret(program, config)?;
    Ok(Mesh::merge(bodies.iter().map(|b| &b.mesh)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh_volume;
    use crate::parser::{parse, Dialect};

    fn run(src: &str) -> Result<Vec<Body>, InterpretError> {
        interpret(&parse(src, Dialect::Canonical).unwrap(), &InterpretConfig::default())
    }

    const CUBE: &str = "opSketch(F0, entities = [\n\
        line(S0, start = (0.00, 0.00), end = (1.00, 0.00)),\n\
        line(S1, start = (1.00, 0.00), end = (1.00, 1.00)),\n\
        line(S2, start = (1.00, 1.00), end = (0.00, 1.00)),\n\
        line(S3, start = (0.00, 1.00), end = (0.00, 0.00)),\n]);\n\
        opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 1.00);\n";

    #[test]
    fn unit_cube() {
        let b = run(CUBE).unwrap();
        assert_eq!(b.len(), 1);
        assert!((mesh_volume(&b[0].mesh).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_union_and_delete() {
        let src = format!(
            "{CUBE}opSketch(F2, entities = [circle(S4, center = (5.00, 5.00), radius = 1.00)]);\n\
             opExtrude(F3, profile = [makeQuery(F2, SKETCH_REGION, FACE, [])], depth = 2.00);\n\
             opBoolean(F4, mode = \"UNION\", targets = [makeQuery(F1, SWEPT_BODY, BODY, []), makeQuery(F3, SWEPT_BODY, BODY, [])]);\n"
        );
        let b = run(&src).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].aliases.contains(&Identifier::new("F4")));
        let del = format!("{src}opSketch(F5, entities = [circle(S5, center = (20.00, 0.00), radius = 1.00)]);\nopExtrude(F6, profile = [makeQuery(F5, SKETCH_REGION, FACE, [])], depth = 1.00);\nopDeleteBodies(F7, entities = [makeQuery(F1, SWEPT_BODY, BODY, [])]);\n");
        let b = run(&del).unwrap();
        assert_eq!(b.iter().map(|b| b.source.as_str()).collect::<Vec<_>>(), ["F6"]);
    }

    #[test]
    fn overlapping_union_is_unsupported() {
        let src = format!(
            "{CUBE}opExtrude(F2, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 2.00);\n\
             opBoolean(F3, mode = \"UNION\", targets = [makeQuery(F1, SWEPT_BODY, BODY, [])], tools = [makeQuery(F2, SWEPT_BODY, BODY, [])]);\n"
        );
        assert_eq!(run(&src).unwrap_err().reason, InterpretReason::UnsupportedOperation);
    }

    #[test]
    fn fillet_is_unsupported() {
        let src = format!("{CUBE}opFillet(F2, entities = [makeQuery(F1, SWEPT_EDGE, EDGE, [])], radius = 0.10);\n");
        let e = run(&src).unwrap_err();
        assert_eq!((e.reason, e.feature.unwrap().as_str().to_string()), (InterpretReason::UnsupportedOperation, "F2".into()));
    }
}
