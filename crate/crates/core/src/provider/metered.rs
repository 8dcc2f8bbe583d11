use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{Completion, Embedder, LanguageModel, ProviderError};
use crate::ledger::{Ledger, Stage, Usage};
use crate::prompt::{RenderedPrompt, TemplateId};
use crate::rag::{EmbeddingVector, RetrievedChunk};
use crate::util::sha256_hex;

fn stage_of(template: TemplateId) -> Stage {
    match template {
        TemplateId::Characteristics => Stage::Characteristics,
        TemplateId::Codegen => Stage::Codegen,
        TemplateId::Repair => Stage::Repair,
        TemplateId::Mutation => Stage::Mutation,
    }
}

/// Records one ledger entry per call. Failed calls are recorded with zero
/// tokens so the call count stays complete.
pub struct MeteredModel {
    inner: Arc<dyn LanguageModel>,
    ledger: Arc<Ledger>,
}

impl MeteredModel {
    pub fn new(inner: Arc<dyn LanguageModel>, ledger: Arc<Ledger>) -> Self {
        Self { inner, ledger }
    }
}

impl LanguageModel for MeteredModel {
    fn model_id(&self) -> &str {
        self.inner.model_id()
    }

    fn complete(&self, prompt: &RenderedPrompt, context: &[RetrievedChunk]) -> Result<Completion, ProviderError> {
        let stage = stage_of(prompt.template_id);
        match self.inner.complete(prompt, context) {
            Ok(c) => {
                self.ledger.record(stage, &c.model_id, c.usage)?;
                Ok(c)
            }
            Err(e) => {
                self.ledger.record(stage, self.inner.model_id(), Usage::default())?;
                Err(e)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    vector: EmbeddingVector,
}

/// Content-addressed embedding cache. Misses go to the wrapped embedder and
/// are billed to the ledger; hits cost nothing.
pub struct CachedEmbedder {
    inner: Arc<dyn Embedder>,
    ledger: Option<Arc<Ledger>>,
    cache: Mutex<HashMap<String, EmbeddingVector>>,
    sink: Option<(PathBuf, Mutex<File>)>,
}

impl CachedEmbedder {
    pub fn new(inner: Arc<dyn Embedder>, ledger: Option<Arc<Ledger>>) -> Self {
        Self {
            inner,
            ledger,
            cache: Mutex::new(HashMap::new()),
            sink: None,
        }
    }

    /// Like [`CachedEmbedder::new`] but backed by a JSONL file that is read
    /// now and appended on every miss.
    pub fn persistent(inner: Arc<dyn Embedder>, ledger: Option<Arc<Ledger>>, path: &Path) -> Result<Self, ProviderError> {
        let io = |e: std::io::Error| ProviderError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut cache = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path).map_err(io)?).lines() {
                let line = line.map_err(io)?;
                // A torn final line from an interrupted run is just a miss.
                if let Ok(entry) = serde_json::from_str::<CacheLine>(&line) {
                    cache.insert(entry.key, entry.vector);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(Self {
            inner,
            ledger,
            cache: Mutex::new(cache),
            sink: Some((path.to_path_buf(), Mutex::new(file))),
        })
    }

    fn key(&self, text: &str) -> String {
        sha256_hex(format!("{}\0{}", self.inner.model_id(), text))
    }

    pub fn cached_len(&self) -> usize {
        self.cache.lock().expect("cache lock poisoned").len()
    }
}

impl Embedder for CachedEmbedder {
    fn model_id(&self) -> &str {
        self.inner.model_id()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        let key = self.key(text);
        if let Some(hit) = self.cache.lock().expect("cache lock poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let (vector, usage) = self.inner.embed_with_usage(text)?;
        if let Some(ledger) = &self.ledger {
            ledger.record(Stage::Embedding, self.inner.model_id(), usage)?;
        }
        if let Some((path, file)) = &self.sink {
            let mut line = serde_json::to_string(&CacheLine {
                key: key.clone(),
                vector: vector.clone(),
            })
            .expect("cache line serializes");
            line.push('\n');
            file.lock()
                .expect("cache file lock poisoned")
                .write_all(line.as_bytes())
                .map_err(|e| ProviderError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
        }
        self.cache.lock().expect("cache lock poisoned").insert(key, vector.clone());
        Ok(vector)
    }

    fn embed_with_usage(&self, text: &str) -> Result<(EmbeddingVector, Usage), ProviderError> {
        // Usage was already billed by `embed` on a miss.
        Ok((self.embed(text)?, Usage::default()))
    }
}
