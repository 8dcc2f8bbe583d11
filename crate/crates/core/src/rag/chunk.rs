use serde::{Deserialize, Serialize};

use super::RagError;
use crate::util::sha256_hex;

/// A fragment of one document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub text: String,
    pub ordinal: usize,
}

impl Chunk {
    pub fn new(doc_id: impl Into<String>, ordinal: usize, text: impl Into<String>) -> Self {
        let doc_id = doc_id.into();
        Self {
            chunk_id: chunk_id(&doc_id, ordinal),
            doc_id,
            text: text.into(),
            ordinal,
        }
    }
}

fn chunk_id(doc_id: &str, ordinal: usize) -> String {
    sha256_hex(format!("{doc_id}\u{0}{ordinal}"))[..16].to_string()
}

/// Sizes are measured in Unicode scalar values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPolicy {
    pub max_chars: usize,
    pub overlap_chars: usize,
}

/// Split `content` into chunks of at most `max_chars`.
///
/// Each chunk after the first repeats the last `overlap_chars` characters of
/// its predecessor. A cut is placed at the latest paragraph break (`\n\n`)
/// in the window, else after the latest sentence terminator followed by
/// whitespace, else at the window edge. Cuts always land beyond the overlap
/// region so every chunk makes progress.
pub fn chunk_document(doc_id: &str, content: &str, policy: ChunkPolicy) -> Result<Vec<Chunk>, RagError> {
    let ChunkPolicy { max_chars, overlap_chars } = policy;
    if max_chars <= overlap_chars {
        return Err(RagError::InvalidPolicy(format!(
            "max_chars ({max_chars}) must exceed overlap_chars ({overlap_chars})"
        )));
    }
    if content.is_empty() {
        return Err(RagError::EmptyDocument(doc_id.to_string()));
    }
    let chars: Vec<char> = content.chars().collect();
    let len = chars.len();
    let mut chunks = Vec::new();
    let mut start = 0;
    loop {
        let window_end = (start + max_chars).min(len);
        let cut = if window_end == len {
            len
        } else {
            let lowest = start + overlap_chars + 1;
            let paragraph = (lowest..=window_end)
                .rev()
                .find(|&p| p >= 2 && chars[p - 1] == '\n' && chars[p - 2] == '\n');
            let sentence = || {
                (lowest..=window_end)
                    .rev()
                    .find(|&p| matches!(chars[p - 1], '.' | '!' | '?') && chars[p].is_whitespace())
            };
            paragraph.or_else(sentence).unwrap_or(window_end)
        };
        let text: String = chars[start..cut].iter().collect();
        chunks.push(Chunk::new(doc_id, chunks.len(), text));
        if cut == len {
            break;
        }
        start = cut - overlap_chars;
    }
    Ok(chunks)
}
