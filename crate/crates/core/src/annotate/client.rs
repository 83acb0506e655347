use std::collections::{BTreeMap, VecDeque};
use std::io::{BufRead, Write};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ClientError, PromptBundle, Role};

/// A text-completion backend.
pub trait CompletionClient: Send + Sync {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ClientError>;

    fn model_id(&self) -> String;
}

/// Deterministic templated output derived from the bundle content.
#[derive(Debug, Clone, Default)]
pub struct MockClient;

impl CompletionClient for MockClient {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ClientError> {
        let kinds = bundle.documented_kinds().join(", ");
        let lines = bundle.payload_code.lines().filter(|l| l.trim_start().starts_with("op")).count();
        Ok(match bundle.role {
            Role::Annotator => format!("A part built in {lines} operations using {kinds}."),
            Role::Reviewer => format!("{} (reviewed)", bundle.draft.as_deref().unwrap_or_default()),
        })
    }

    fn model_id(&self) -> String {
        "mock".into()
    }
}

/// Fails a fixed number of times, then delegates. Useful for retry tests.
pub struct FlakyClient<C> {
    inner: C,
    failures: Mutex<BTreeMap<Role, usize>>,
}

impl<C: CompletionClient> FlakyClient<C> {
    pub fn new(inner: C, annotator_failures: usize, reviewer_failures: usize) -> Self {
        let failures = BTreeMap::from([(Role::Annotator, annotator_failures), (Role::Reviewer, reviewer_failures)]);
        FlakyClient { inner, failures: Mutex::new(failures) }
    }
}

impl<C: CompletionClient> CompletionClient for FlakyClient<C> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ClientError> {
        let mut f = self.failures.lock().expect("lock");
        let left = f.entry(bundle.role).or_default();
        if *left > 0 {
            *left -= 1;
            return Err(ClientError::Transport("injected failure".into()));
        }
        drop(f);
        self.inner.complete(bundle)
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub role: Role,
    pub system: String,
    pub user: String,
    pub response: String,
}

/// Passes requests through and keeps every exchange for later replay.
pub struct RecordingClient<C> {
    inner: C,
    log: Mutex<Vec<Exchange>>,
}

impl<C: CompletionClient> RecordingClient<C> {
    pub fn new(inner: C) -> Self {
        RecordingClient { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().expect("lock").clone()
    }

    pub fn write_jsonl(&self, out: &mut impl Write) -> std::io::Result<()> {
        for e in self.exchanges() {
            writeln!(out, "{}", serde_json::to_string(&e).expect("exchange serializes"))?;
        }
        Ok(())
    }
}

impl<C: CompletionClient> CompletionClient for RecordingClient<C> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ClientError> {
        let response = self.inner.complete(bundle)?;
        let (system, user) = bundle.render();
        self.log.lock().expect("lock").push(Exchange { role: bundle.role, system, user, response: response.clone() });
        Ok(response)
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }
}

/// Answers from recorded exchanges keyed by the rendered prompt.
pub struct ReplayClient {
    answers: Mutex<BTreeMap<(String, String), VecDeque<String>>>,
    model: String,
}

impl ReplayClient {
    pub fn new(exchanges: Vec<Exchange>, model: impl Into<String>) -> Self {
        let mut answers: BTreeMap<(String, String), VecDeque<String>> = BTreeMap::new();
        for e in exchanges {
            answers.entry((e.system, e.user)).or_default().push_back(e.response);
        }
        ReplayClient { answers: Mutex::new(answers), model: model.into() }
    }

    pub fn from_jsonl(input: impl BufRead, model: impl Into<String>) -> Result<Self, ClientError> {
        let mut ex = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| ClientError::Transport(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            ex.push(
                serde_json::from_str(&line).map_err(|e| ClientError::Malformed(format!("line {}: {e}", n + 1)))?,
            );
        }
        Ok(Self::new(ex, model))
    }
}

impl CompletionClient for ReplayClient {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ClientError> {
        let key = bundle.render();
        let mut answers = self.answers.lock().expect("lock");
        let q = answers.get_mut(&key).ok_or_else(|| ClientError::Missing("no recorded response for prompt".into()))?;
        // The last recorded answer keeps serving repeated prompts.
        if q.len() > 1 {
            Ok(q.pop_front().expect("non-empty"))
        } else {
            q.front().cloned().ok_or_else(|| ClientError::Missing("no recorded response for prompt".into()))
        }
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

/// OpenAI-style chat-completions endpoint configured from the environment:
/// `FSCAD_LLM_ENDPOINT`, `FSCAD_LLM_API_KEY`, `FSCAD_LLM_MODEL`.
#[cfg(feature = "http")]
pub struct HttpClient {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

#[cfg(feature = "http")]
impl HttpClient {
    pub fn from_env() -> Result<Self, ClientError> {
        let endpoint = std::env::var("FSCAD_LLM_ENDPOINT")
            .map_err(|_| ClientError::Config("FSCAD_LLM_ENDPOINT is not set".into()))?;
        let model = std::env::var("FSCAD_LLM_MODEL").map_err(|_| ClientError::Config("FSCAD_LLM_MODEL is not set".into()))?;
        let api_key = std::env::var("FSCAD_LLM_API_KEY").ok();
        let agent = ureq::AgentBuilder::new().timeout(std::time::Duration::from_secs(300)).build();
        Ok(HttpClient { endpoint, api_key, model, agent })
    }
}

#[cfg(feature = "http")]
impl CompletionClient for HttpClient {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, ClientError> {
        let (system, user) = bundle.render();
        let body = serde_json::json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let mut req = self.agent.post(&self.endpoint).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp: serde_json::Value =
            req.send_json(body).map_err(|e| ClientError::Transport(e.to_string()))?.into_json().map_err(|e| {
                ClientError::Malformed(e.to_string())
            })?;
        resp["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed("response has no message content".into()))
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}
