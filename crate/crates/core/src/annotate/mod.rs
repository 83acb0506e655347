//! Prompt assembly and the annotator/reviewer pipeline over an abstract
//! completion client.

mod client;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{OpKind, Program};
use crate::parser::{emit, parse, Dialect};
use crate::schema::operation_section;

#[cfg(feature = "http")]
pub use client::HttpClient;
pub use client::{CompletionClient, Exchange, FlakyClient, MockClient, RecordingClient, ReplayClient};

pub const ANNOTATOR_PROMPT_V1: &str = include_str!("../../prompts/annotator.v1.txt");
pub const REVIEWER_PROMPT_V1: &str = include_str!("../../prompts/reviewer.v1.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Annotator,
    Reviewer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShot {
    pub code: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocExcerpt {
    pub kind: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub role: Role,
    pub system_text: String,
    pub documentation_excerpts: Vec<DocExcerpt>,
    pub fewshot_examples: Vec<FewShot>,
    pub payload_code: String,
    pub draft: Option<String>,
}

impl PromptBundle {
    pub fn documented_kinds(&self) -> Vec<&str> {
        self.documentation_excerpts.iter().map(|d| d.kind.as_str()).collect()
    }

    /// System and user message text.
    pub fn render(&self) -> (String, String) {
        let mut user = String::new();
        if !self.documentation_excerpts.is_empty() {
            user.push_str("# Documentation\n");
            for d in &self.documentation_excerpts {
                user.push_str(&d.text);
            }
            user.push('\n');
        }
        for (i, ex) in self.fewshot_examples.iter().enumerate() {
            user.push_str(&format!("# Example {}\n```\n{}```\n{}\n\n", i + 1, ex.code, ex.description));
        }
        user.push_str(&format!("# Code\n```\n{}```\n", self.payload_code));
        if let Some(d) = &self.draft {
            user.push_str(&format!("\n# Draft\n{d}\n"));
        }
        (self.system_text.clone(), user)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("replay: {0}")]
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotateError {
    #[error("program is not canonical: {0}")]
    NotCanonical(String),
    #[error("reviewer needs a non-empty draft")]
    EmptyDraft,
    #[error("{stage} failed after {attempts} attempts: {source}")]
    Stage { stage: Role, attempts: usize, source: ClientError },
}

/// Reference sections for each operation kind that occurs, in schema order.
pub fn select_documentation(program: &Program) -> Vec<DocExcerpt> {
    OpKind::ALL
        .iter()
        .filter(|k| program.kinds().any(|p| p.label() == k.label()))
        .map(|&k| DocExcerpt { kind: k.label().to_string(), text: operation_section(k) })
        .collect()
}

fn canonical_text(program: &Program) -> Result<String, AnnotateError> {
    let text = emit(program);
    parse(&text, Dialect::Canonical).map_err(|e| AnnotateError::NotCanonical(e.to_string()))?;
    Ok(text)
}

pub fn assemble_annotator_prompt(
    program: &Program,
    system_text: &str,
    fewshot: &[FewShot],
) -> Result<PromptBundle, AnnotateError> {
    Ok(PromptBundle {
        role: Role::Annotator,
        system_text: system_text.to_string(),
        documentation_excerpts: select_documentation(program),
        fewshot_examples: fewshot.to_vec(),
        payload_code: canonical_text(program)?,
        draft: None,
    })
}

pub fn assemble_reviewer_prompt(program: &Program, draft: &str, system_text: &str) -> Result<PromptBundle, AnnotateError> {
    if draft.trim().is_empty() {
        return Err(AnnotateError::EmptyDraft);
    }
    Ok(PromptBundle {
        role: Role::Reviewer,
        system_text: system_text.to_string(),
        documentation_excerpts: select_documentation(program),
        fewshot_examples: Vec::new(),
        payload_code: canonical_text(program)?,
        draft: Some(draft.to_string()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub annotator_prompt: String,
    pub reviewer_prompt: String,
    pub fewshot: Vec<FewShot>,
    /// Extra attempts after the first failure of a stage.
    pub retries: usize,
    pub record_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            annotator_prompt: ANNOTATOR_PROMPT_V1.to_string(),
            reviewer_prompt: REVIEWER_PROMPT_V1.to_string(),
            fewshot: Vec::new(),
            retries: 2,
            record_timings: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub annotator_ms: u128,
    pub reviewer_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub draft_text: String,
    pub reviewed_text: String,
    pub model_id: String,
    pub annotator_attempts: usize,
    pub reviewer_attempts: usize,
    pub timings: Option<Timings>,
}

fn call_with_retries(
    client: &dyn CompletionClient,
    bundle: &PromptBundle,
    retries: usize,
) -> Result<(String, usize, u128), AnnotateError> {
    let start = Instant::now();
    let mut attempt = 0;
    loop {
        attempt += 1;
        match client.complete(bundle) {
            Ok(text) if !text.trim().is_empty() => return Ok((text, attempt, start.elapsed().as_millis())),
            Ok(_) if attempt > retries => {
                return Err(AnnotateError::Stage {
                    stage: bundle.role,
                    attempts: attempt,
                    source: ClientError::Malformed("empty completion".into()),
                })
            }
            Err(e) if attempt > retries => return Err(AnnotateError::Stage { stage: bundle.role, attempts: attempt, source: e }),
            _ => {}
        }
    }
}

/// Annotator call followed by a Reviewer call on the draft.
pub fn run_pipeline(
    program: &Program,
    client: &dyn CompletionClient,
    config: &PipelineConfig,
) -> Result<Annotation, AnnotateError> {
    let a = assemble_annotator_prompt(program, &config.annotator_prompt, &config.fewshot)?;
    let (draft, annotator_attempts, ta) = call_with_retries(client, &a, config.retries)?;
    let r = assemble_reviewer_prompt(program, &draft, &config.reviewer_prompt)?;
    let (reviewed, reviewer_attempts, tr) = call_with_retries(client, &r, config.retries)?;
    Ok(Annotation {
        draft_text: draft,
        reviewed_text: reviewed,
        model_id: client.model_id(),
        annotator_attempts,
        reviewer_attempts,
        timings: config.record_timings.then_some(Timings { annotator_ms: ta, reviewer_ms: tr }),
    })
}

/// One line of batch output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub id: String,
    pub code: String,
    pub draft: Option<String>,
    pub reviewed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Annotates `(id, program)` items with at most `parallelism` calls in
/// flight; output order follows input order.
pub fn run_batch(
    items: &[(String, Program)],
    client: &dyn CompletionClient,
    config: &PipelineConfig,
    parallelism: usize,
) -> Result<Vec<BatchRecord>, AnnotateError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| AnnotateError::Stage {
            stage: Role::Annotator,
            attempts: 0,
            source: ClientError::Config(e.to_string()),
        })?;
    Ok(pool.install(|| {
        items
            .par_iter()
            .map(|(id, program)| {
                let code = emit(program);
                match run_pipeline(program, client, config) {
                    Ok(a) => BatchRecord {
                        id: id.clone(),
                        code,
                        draft: Some(a.draft_text),
                        reviewed: Some(a.reviewed_text),
                        error: None,
                    },
                    Err(e) => BatchRecord { id: id.clone(), code, draft: None, reviewed: None, error: Some(e.to_string()) },
                }
            })
            .collect()
    }))
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Annotator => "annotator",
            Role::Reviewer => "reviewer",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CYL: &str = "opSketch(F0, entities = [circle(S0, center = (0.00, 0.00), radius = 5.00)]);\n\
                       opExtrude(F1, profile = [makeQuery(F0, SKETCH_REGION, FACE, [])], depth = 10.00);\n";

    fn cyl() -> Program {
        parse(CYL, Dialect::Canonical).unwrap()
    }

    #[test]
    fn documentation_matches_kinds_present() {
        let b = assemble_annotator_prompt(&cyl(), ANNOTATOR_PROMPT_V1, &[]).unwrap();
        assert_eq!(b.documented_kinds(), ["Sketch", "Extrude"]);
        assert!(b.fewshot_examples.is_empty() && b.draft.is_none());
    }

    #[test]
    fn raw_program_is_rejected() {
        let raw = parse("opSketch(s, entities = [circle(c, center = (0, 0), radius = 1 inch)]);", Dialect::Raw).unwrap();
        assert!(matches!(assemble_annotator_prompt(&raw, "", &[]), Err(AnnotateError::NotCanonical(_))));
    }

    #[test]
    fn reviewer_requires_draft() {
        assert_eq!(assemble_reviewer_prompt(&cyl(), "  ", ""), Err(AnnotateError::EmptyDraft));
        let b = assemble_reviewer_prompt(&cyl(), "a disc", "").unwrap();
        assert_eq!((b.role, b.draft.as_deref()), (Role::Reviewer, Some("a disc")));
    }

    #[test]
    fn retries_are_counted_and_exhaustion_names_stage() {
        let cfg = PipelineConfig { retries: 3, ..Default::default() };
        let a = run_pipeline(&cyl(), &FlakyClient::new(MockClient, 2, 0), &cfg).unwrap();
        assert_eq!((a.annotator_attempts, a.reviewer_attempts), (3, 1));
        let cfg = PipelineConfig { retries: 1, ..Default::default() };
        let e = run_pipeline(&cyl(), &FlakyClient::new(MockClient, 0, 5), &cfg).unwrap_err();
        assert!(e.to_string().starts_with("reviewer failed after 2 attempts"), "{e}");
    }

    #[test]
    fn record_then_replay() {
        let rec = RecordingClient::new(MockClient);
        let cfg = PipelineConfig::default();
        let a = run_pipeline(&cyl(), &rec, &cfg).unwrap();
        let mut buf = Vec::new();
        rec.write_jsonl(&mut buf).unwrap();
        let replay = ReplayClient::from_jsonl(buf.as_slice(), "mock").unwrap();
        assert_eq!(run_pipeline(&cyl(), &replay, &cfg).unwrap(), a);
    }
}
