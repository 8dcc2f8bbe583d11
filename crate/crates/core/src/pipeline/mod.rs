//! Two-stage test-case generation, the compile/repair loop and mutation.

mod codeblock;
mod features;

pub use codeblock::{ensure_preamble, extract_code_block, HEADER_PREAMBLE};
pub use features::{sample_features, FeatureCatalog, FeatureSelection};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::PassFunction;
use crate::ledger::Usage;
use crate::prompt::{PromptError, PromptSet, RenderedPrompt, TemplateId};
use crate::provider::{Embedder, LanguageModel, ProviderError};
use crate::rag::{retrieve, FlatIndex, RagError, RetrievedChunk, VectorStore};
use crate::scan::braces_balanced;
use crate::util::{derive_seed, sha256_hex};

pub const DEFAULT_MAX_REPAIR_ATTEMPTS: usize = 5;

/// Stand-in for an empty compiler diagnostic in the repair prompt.
pub const EMPTY_STDERR: &str = "(the compiler failed without printing a diagnostic)";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Rag(#[from] RagError),
    #[error("the model returned an empty response")]
    EmptyResponse,
    #[error("no code block found in the model response")]
    NoCodeBlock,
    #[error("catalog axis `{0}` is empty")]
    EmptyCatalog(String),
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
    #[error("gate compile failed: {0}")]
    Gate(String),
}

/// Retrieval settings bound to an index and the embedder that built it.
pub struct Retriever {
    pub store: FlatIndex,
    pub embedder: Arc<dyn Embedder>,
    pub threshold: f64,
    pub k: usize,
}

impl Retriever {
    pub fn context(&self, query: &str) -> Result<Vec<RetrievedChunk>, RagError> {
        if self.store.is_empty() {
            return Ok(Vec::new());
        }
        retrieve(&self.store, query, self.threshold, self.k, self.embedder.as_ref())
    }
}

/// What every generation step needs: templates, a model and optional RAG.
pub struct GenContext<'a> {
    pub prompts: &'a PromptSet,
    pub llm: &'a dyn LanguageModel,
    pub retriever: Option<&'a Retriever>,
}

/// One persisted model call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub template: TemplateId,
    pub prompt: String,
    pub context_chunks: Vec<String>,
    pub response: String,
    pub model_id: String,
    pub usage: Usage,
}

impl GenContext<'_> {
    /// Retrieve context for the prompt text and call the model.
    pub fn ask(&self, prompt: &RenderedPrompt) -> Result<Exchange, PipelineError> {
        let context = match self.retriever {
            Some(r) => r.context(&prompt.text)?,
            None => Vec::new(),
        };
        let completion = self.llm.complete(prompt, &context)?;
        Ok(Exchange {
            template: prompt.template_id,
            prompt: prompt.text.clone(),
            context_chunks: context.iter().map(|c| c.chunk.chunk_id.clone()).collect(),
            response: completion.text,
            model_id: completion.model_id,
            usage: completion.usage,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Characteristics {
    pub id: String,
    pub pass_name: String,
    pub function_id: String,
    pub function_name: String,
    pub text: String,
}

/// Stable identity of an extracted definition.
pub fn function_id(f: &PassFunction) -> String {
    sha256_hex(format!("{}\0{}\0{}", f.pass_name, f.qualified_name, f.body))[..12].to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Draft,
    Compiles,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairStep {
    pub attempt: usize,
    pub error: String,
    pub fix: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub characteristics_id: String,
    pub function_id: String,
    pub features: FeatureSelection,
    pub parent: Option<String>,
    pub transcript: Vec<RepairStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub case_id: String,
    pub pass_name: String,
    pub source: String,
    pub lineage: Lineage,
    pub status: CaseStatus,
    #[serde(default)]
    pub abandon_reason: Option<String>,
}

/// Id of the `index`-th seed case generated from a characteristics record.
pub fn seed_case_id(characteristics_id: &str, index: usize) -> String {
    sha256_hex(format!("seed\0{characteristics_id}\0{index}"))[..12].to_string()
}

/// Id of the `index`-th mutation child of `parent`.
pub fn child_case_id(parent: &str, index: usize) -> String {
    sha256_hex(format!("mutation\0{parent}\0{index}"))[..12].to_string()
}

/// Characteristics for one extracted definition.
pub fn generate_characteristics(f: &PassFunction, ctx: &GenContext<'_>) -> Result<(Characteristics, Exchange), PipelineError> {
    let prompt = ctx.prompts.characteristics_prompt(&f.pass_name, &f.body)?;
    let exchange = ctx.ask(&prompt)?;
    if exchange.response.trim().is_empty() {
        return Err(PipelineError::EmptyResponse);
    }
    let function_id = function_id(f);
    let ch = Characteristics {
        id: sha256_hex(format!("characteristics\0{function_id}"))[..12].to_string(),
        pass_name: f.pass_name.clone(),
        function_id,
        function_name: f.qualified_name.clone(),
        text: exchange.response.clone(),
    };
    Ok((ch, exchange))
}

/// A draft test case from characteristics plus sampled features.
pub fn generate_testcase(
    case_id: &str,
    ch: &Characteristics,
    fs: &FeatureSelection,
    ctx: &GenContext<'_>,
) -> Result<(TestCase, Exchange), PipelineError> {
    let reqs = format!("{}\n\n{}", ch.text.trim_end(), fs.render());
    let prompt = ctx.prompts.codegen_prompt(&ch.pass_name, &reqs)?;
    let exchange = ctx.ask(&prompt)?;
    let source = ensure_preamble(&extract_code_block(&exchange.response)?);
    let case = TestCase {
        case_id: case_id.to_string(),
        pass_name: ch.pass_name.clone(),
        source,
        lineage: Lineage {
            characteristics_id: ch.id.clone(),
            function_id: ch.function_id.clone(),
            features: fs.clone(),
            parent: None,
            transcript: Vec::new(),
        },
        status: CaseStatus::Draft,
        abandon_reason: None,
    };
    Ok((case, exchange))
}

/// Result of compiling a source at the repair gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateResult {
    pub ok: bool,
    pub stderr: String,
}

/// The single compiler configuration used to decide whether repair is
/// needed. `attempt` is 0 for the initial compile.
pub trait Gate {
    fn compile(&self, case: &TestCase, attempt: usize) -> Result<GateResult, PipelineError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    pub final_case: TestCase,
    pub attempts: usize,
    pub succeeded: bool,
    /// Abandoned because of a provider or gate error rather than
    /// exhausted repairs.
    pub fault: bool,
    pub exchanges: Vec<Exchange>,
}

/// Compile, and on failure ask for a fix, up to `max_attempts` times.
/// Sources with unbalanced braces are rejected without invoking the
/// compiler.
pub fn repair_loop(mut case: TestCase, gate: &dyn Gate, ctx: &GenContext<'_>, max_attempts: usize) -> RepairOutcome {
    let mut exchanges = Vec::new();
    let mut attempts = 0;
    loop {
        let result = if braces_balanced(&case.source) {
            gate.compile(&case, attempts)
        } else {
            Ok(GateResult {
                ok: false,
                stderr: "error: unbalanced braces in source (rejected before compilation)".into(),
            })
        };
        let result = match result {
            Ok(r) => r,
            Err(e) => return abandon(case, attempts, exchanges, format!("{e}"), true),
        };
        if result.ok {
            case.status = CaseStatus::Compiles;
            case.abandon_reason = None;
            return RepairOutcome {
                final_case: case,
                attempts,
                succeeded: true,
                fault: false,
                exchanges,
            };
        }
        if attempts >= max_attempts {
            let reason = format!("still failing to compile after {attempts} repair attempt(s)");
            return abandon(case, attempts, exchanges, reason, false);
        }
        attempts += 1;
        let error = if result.stderr.trim().is_empty() {
            EMPTY_STDERR.to_string()
        } else {
            result.stderr
        };
        let fixed = ctx
            .prompts
            .repair_prompt(&case.source, &error)
            .map_err(PipelineError::from)
            .and_then(|p| ctx.ask(&p))
            .and_then(|x| {
                let source = ensure_preamble(&extract_code_block(&x.response)?);
                Ok((x, source))
            });
        match fixed {
            Ok((exchange, source)) => {
                exchanges.push(exchange);
                case.lineage.transcript.push(RepairStep {
                    attempt: attempts,
                    error,
                    fix: source.clone(),
                });
                case.source = source;
            }
            Err(e) => {
                case.lineage.transcript.push(RepairStep {
                    attempt: attempts,
                    error,
                    fix: String::new(),
                });
                return abandon(case, attempts, exchanges, format!("repair attempt {attempts} failed: {e}"), true);
            }
        }
    }
}

fn abandon(mut case: TestCase, attempts: usize, exchanges: Vec<Exchange>, reason: String, fault: bool) -> RepairOutcome {
    case.status = CaseStatus::Abandoned;
    case.abandon_reason = Some(reason);
    RepairOutcome {
        final_case: case,
        attempts,
        succeeded: false,
        fault,
        exchanges,
    }
}

/// Seed for the `index`-th mutation of `parent`.
pub fn mutation_seed(base_seed: u64, parent: &str, index: usize) -> u64 {
    derive_seed(base_seed, &["mutation", parent, &index.to_string()])
}

/// The `index`-th mutation child of a compiling case, as a draft.
pub fn mutate_one(
    parent: &TestCase,
    index: usize,
    catalog: &FeatureCatalog,
    base_seed: u64,
    ctx: &GenContext<'_>,
) -> Result<(TestCase, Exchange), PipelineError> {
    let features = sample_features(catalog, mutation_seed(base_seed, &parent.case_id, index))?;
    let prompt = ctx.prompts.mutation_prompt(&parent.source, &features.render())?;
    let exchange = ctx.ask(&prompt)?;
    let source = ensure_preamble(&extract_code_block(&exchange.response)?);
    let child = TestCase {
        case_id: child_case_id(&parent.case_id, index),
        pass_name: parent.pass_name.clone(),
        source,
        lineage: Lineage {
            characteristics_id: parent.lineage.characteristics_id.clone(),
            function_id: parent.lineage.function_id.clone(),
            features,
            parent: Some(parent.case_id.clone()),
            transcript: Vec::new(),
        },
        status: CaseStatus::Draft,
        abandon_reason: None,
    };
    Ok((child, exchange))
}

/// `x` mutation children of `parent`.
pub fn mutate(
    parent: &TestCase,
    x: usize,
    catalog: &FeatureCatalog,
    base_seed: u64,
    ctx: &GenContext<'_>,
) -> Result<Vec<(TestCase, Exchange)>, PipelineError> {
    (0..x).map(|i| mutate_one(parent, i, catalog, base_seed, ctx)).collect()
}

#[cfg(test)]
mod tests;
