use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{wire_text, Completion, Embedder, LanguageModel, ProviderError};
use crate::ledger::Usage;
use crate::prompt::{RenderedPrompt, TemplateId, PASS_NAME};
use crate::rag::{EmbeddingVector, RetrievedChunk};
use crate::util::approx_tokens;

/// Deterministic embedder: a unit vector drawn from a generator seeded by
/// `sha256(seed, text)`.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    seed: u64,
    dim: usize,
    model_id: String,
}

impl HashEmbedder {
    pub fn new(seed: u64, dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            seed,
            dim,
            model_id: "mock-embed".into(),
        }
    }
}

impl Embedder for HashEmbedder {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        if text.is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(text.as_bytes());
        let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());
        let mut values: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            values[0] = 1.0;
        } else {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(EmbeddingVector::new(values).expect("finite non-empty vector"))
    }
}

/// One canned response. A rule matches when the template agrees and every
/// optional key is satisfied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRule {
    pub template: TemplateId,
    /// Required value of the pass-name binding.
    #[serde(default)]
    pub pass_name: Option<String>,
    /// Substring that must occur in at least one binding value.
    #[serde(default)]
    pub contains: Option<String>,
    pub response: String,
    #[serde(default)]
    pub usage: Option<Usage>,
}

impl ScriptRule {
    fn matches(&self, prompt: &RenderedPrompt) -> bool {
        self.template == prompt.template_id
            && self
                .pass_name
                .as_ref()
                .is_none_or(|p| prompt.bindings.get(PASS_NAME) == Some(p))
            && self
                .contains
                .as_ref()
                .is_none_or(|needle| prompt.bindings.values().any(|v| v.contains(needle.as_str())))
    }
}

/// Stateless scripted LLM: the first matching rule answers.
#[derive(Debug, Clone)]
pub struct ScriptedModel {
    rules: Vec<ScriptRule>,
    model_id: String,
}

impl ScriptedModel {
    pub fn new(rules: Vec<ScriptRule>) -> Self {
        Self {
            rules,
            model_id: "mock-llm".into(),
        }
    }

    /// Answer every prompt with `response`.
    pub fn constant(response: impl Into<String>) -> Self {
        let response = response.into();
        Self::new(
            TemplateId::ALL
                .into_iter()
                .map(|template| ScriptRule {
                    template,
                    pass_name: None,
                    contains: None,
                    response: response.clone(),
                    usage: None,
                })
                .collect(),
        )
    }

    /// Parse a rules file: a `[[rule]]` array of [`ScriptRule`]s.
    pub fn from_toml(text: &str) -> Result<Self, ProviderError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            #[serde(default)]
            rule: Vec<ScriptRule>,
        }
        let file: File = toml::from_str(text).map_err(|e| ProviderError::Config(format!("mock rules: {e}")))?;
        Ok(Self::new(file.rule))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|e| ProviderError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn rules(&self) -> &[ScriptRule] {
        &self.rules
    }
}

impl LanguageModel for ScriptedModel {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, prompt: &RenderedPrompt, context: &[RetrievedChunk]) -> Result<Completion, ProviderError> {
        if prompt.text.is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let rule = self.rules.iter().find(|r| r.matches(prompt)).ok_or_else(|| {
            let detail = prompt
                .bindings
                .get(PASS_NAME)
                .map(|p| format!(" for pass `{p}`"))
                .unwrap_or_default();
            ProviderError::NoScriptedResponse {
                template: prompt.template_id.to_string(),
                detail,
            }
        })?;
        let usage = rule.usage.unwrap_or_else(|| Usage {
            input_tokens: approx_tokens(&wire_text(prompt, context)),
            output_tokens: approx_tokens(&rule.response),
            approximate: true,
        });
        Ok(Completion {
            text: rule.response.clone(),
            usage,
            model_id: self.model_id.clone(),
        })
    }
}
