//! Retrieval-augmented generation: documentation chunking, an exhaustive
//! flat vector index, and thresholded nearest-neighbour retrieval.

mod chunk;
mod embedding;
mod store;

pub use chunk::{chunk_document, Chunk, ChunkPolicy};
pub use embedding::{cosine_distance, EmbeddingVector};
pub use store::{FlatIndex, VectorStore};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::{Embedder, ProviderError};

#[derive(Debug, Error)]
pub enum RagError {
    #[error("invalid chunk policy: {0}")]
    InvalidPolicy(String),
    #[error("document `{0}` is empty")]
    EmptyDocument(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cosine distance is undefined for an all-zero vector")]
    ZeroVector,
    #[error("embedding contains non-finite values")]
    NonFinite,
    #[error("embedding has no components")]
    EmptyVector,
    #[error("the vector index is empty")]
    EmptyIndex,
    #[error("invalid retrieval query: {0}")]
    InvalidQuery(String),
    #[error("index at {path} is corrupt: {reason}")]
    CorruptIndex { path: PathBuf, reason: String },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Retrieval knobs. The defaults are starting points, not tuned values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RagPolicy {
    pub max_chars: usize,
    pub overlap_chars: usize,
    pub threshold: f64,
    pub k: usize,
}

impl Default for RagPolicy {
    fn default() -> Self {
        Self {
            max_chars: 1500,
            overlap_chars: 200,
            threshold: 0.5,
            k: 4,
        }
    }
}

impl RagPolicy {
    pub fn chunk_policy(&self) -> ChunkPolicy {
        ChunkPolicy {
            max_chars: self.max_chars,
            overlap_chars: self.overlap_chars,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexStats {
    pub count: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedChunk {
    pub chunk: Chunk,
    pub distance: f64,
}

/// Embed and store every chunk. Re-indexing a chunk id overwrites it.
pub fn index<S: VectorStore + ?Sized>(
    store: &mut S,
    chunks: &[Chunk],
    embedder: &dyn Embedder,
) -> Result<IndexStats, RagError> {
    for chunk in chunks {
        let embedding = embedder.embed(&chunk.text)?;
        store.upsert(chunk.clone(), embedding)?;
    }
    Ok(IndexStats {
        count: store.len(),
        dim: store.dim().unwrap_or_else(|| embedder.dim()),
    })
}

/// Up to `k` chunks with distance strictly below `threshold`, nearest first;
/// ties are ordered by `(doc_id, ordinal)`.
pub fn retrieve<S: VectorStore + ?Sized>(
    store: &S,
    query_text: &str,
    threshold: f64,
    k: usize,
    embedder: &dyn Embedder,
) -> Result<Vec<RetrievedChunk>, RagError> {
    if !(threshold > 0.0 && threshold <= 2.0) {
        return Err(RagError::InvalidQuery(format!("threshold {threshold} outside (0, 2]")));
    }
    if k == 0 {
        return Err(RagError::InvalidQuery("k must be at least 1".into()));
    }
    if store.len() == 0 {
        return Err(RagError::EmptyIndex);
    }
    let query = embedder.embed(query_text)?;
    let mut hits = Vec::new();
    for (chunk, embedding) in store.entries() {
        let distance = cosine_distance(&query, embedding)?;
        if distance < threshold {
            hits.push(RetrievedChunk {
                chunk: chunk.clone(),
                distance,
            });
        }
    }
    hits.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.chunk.doc_id.cmp(&b.chunk.doc_id))
            .then_with(|| a.chunk.ordinal.cmp(&b.chunk.ordinal))
    });
    hits.truncate(k);
    Ok(hits)
}

/// A documentation file accepted for indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub content: String,
}

/// Load plain-text and markdown documents matched by `globs` under
/// `base_dir`. The document id is the path relative to `base_dir` when
/// possible.
pub fn load_documents(globs: &[String], base_dir: &Path) -> Result<Vec<Document>, RagError> {
    let mut paths = Vec::new();
    for pattern in globs {
        let full = if Path::new(pattern).is_absolute() {
            pattern.clone()
        } else {
            base_dir.join(pattern).to_string_lossy().into_owned()
        };
        let entries = glob::glob(&full).map_err(|e| RagError::InvalidQuery(format!("bad doc glob `{pattern}`: {e}")))?;
        for path in entries.flatten() {
            let accepted = matches!(
                path.extension().and_then(|e| e.to_str()),
                Some("txt" | "md" | "markdown" | "rst" | "text")
            );
            if path.is_file() && accepted {
                paths.push(path);
            }
        }
    }
    paths.sort();
    paths.dedup();
    paths
        .into_iter()
        .map(|path| {
            let content = std::fs::read_to_string(&path).map_err(|source| RagError::Io {
                path: path.clone(),
                source,
            })?;
            let doc_id = path
                .strip_prefix(base_dir)
                .unwrap_or(&path)
                .to_string_lossy()
                .replace('\\', "/");
            Ok(Document { doc_id, content })
        })
        .collect()
}
