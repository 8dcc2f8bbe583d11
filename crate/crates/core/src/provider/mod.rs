//! LLM completion and text embedding backends.
//!
//! Every backend implements [`LanguageModel`] or [`Embedder`]. The HTTP
//! implementations talk to an OpenAI-style endpoint through a pluggable
//! [`Transport`]; the mocks are pure functions of their inputs.

mod cassette;
mod http;
mod metered;
mod mock;

pub use cassette::{CassetteEntry, RecordingTransport, ReplayTransport};
pub use http::{
    HttpChatModel, HttpEmbedder, HttpRequest, HttpResponse, ProviderConfig, RateLimiter, ReqwestTransport, Transport,
    TransportError,
};
pub use metered::{CachedEmbedder, MeteredModel};
pub use mock::{HashEmbedder, ScriptRule, ScriptedModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{LedgerError, Usage};
use crate::prompt::RenderedPrompt;
use crate::rag::{EmbeddingVector, RetrievedChunk};

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider unavailable after {attempts} attempt(s): {message}")]
    Unavailable { attempts: u32, message: String },
    #[error("authentication failed: {0}")]
    AuthFailure(String),
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("request rejected with status {status}: {message}")]
    Rejected { status: u16, message: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("empty input")]
    EmptyInput,
    #[error("no scripted response for {template} prompt{detail}")]
    NoScriptedResponse { template: String, detail: String },
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("cassette: {0}")]
    Cassette(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("{path}: {message}")]
    Io { path: std::path::PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: Usage,
    pub model_id: String,
}

pub trait LanguageModel: Send + Sync {
    fn model_id(&self) -> &str;

    /// Send `context` followed by the prompt as a single request.
    fn complete(&self, prompt: &RenderedPrompt, context: &[RetrievedChunk]) -> Result<Completion, ProviderError>;
}

pub trait Embedder: Send + Sync {
    fn model_id(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError>;

    /// Embed and report token usage. Backends that cannot report usage fall
    /// back to a flagged `ceil(chars / 4)` estimate.
    fn embed_with_usage(&self, text: &str) -> Result<(EmbeddingVector, Usage), ProviderError> {
        let vector = self.embed(text)?;
        Ok((
            vector,
            Usage {
                input_tokens: crate::util::approx_tokens(text),
                output_tokens: 0,
                approximate: true,
            },
        ))
    }
}

const CONTEXT_OPEN: &str = "----- context";
const CONTEXT_END: &str = "----- end of context -----";

/// The exact text sent for a prompt: retrieved chunks in rank order, each
/// in a delimited block, then the prompt.
pub fn wire_text(prompt: &RenderedPrompt, context: &[RetrievedChunk]) -> String {
    let mut out = String::new();
    for (rank, hit) in context.iter().enumerate() {
        out.push_str(&format!(
            "{CONTEXT_OPEN} {} ({} #{}) -----\n{}\n",
            rank + 1,
            hit.chunk.doc_id,
            hit.chunk.ordinal,
            hit.chunk.text
        ));
    }
    if !context.is_empty() {
        out.push_str(CONTEXT_END);
        out.push_str("\n\n");
    }
    out.push_str(&prompt.text);
    out
}
