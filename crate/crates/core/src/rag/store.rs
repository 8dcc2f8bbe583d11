use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Chunk, EmbeddingVector, RagError};

/// Storage behind retrieval. Mutation needs `&mut`, so a store is either
/// being written by one owner or read concurrently through shared refs.
pub trait VectorStore: Send + Sync {
    /// Dimension fixed by the first insert.
    fn dim(&self) -> Option<usize>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn upsert(&mut self, chunk: Chunk, embedding: EmbeddingVector) -> Result<(), RagError>;
    fn entries(&self) -> Box<dyn Iterator<Item = (&Chunk, &EmbeddingVector)> + '_>;
}

/// Exact-scan index kept in memory and persisted as a JSON manifest plus a
/// little-endian `f64` matrix.
#[derive(Debug, Default, Clone)]
pub struct FlatIndex {
    dim: Option<usize>,
    rows: Vec<(Chunk, EmbeddingVector)>,
    by_id: HashMap<String, usize>,
}

const MANIFEST: &str = "manifest.json";
const MATRIX: &str = "embeddings.bin";

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    dim: usize,
    chunks: Vec<Chunk>,
}

impl FlatIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn exists(dir: &Path) -> bool {
        dir.join(MANIFEST).is_file() && dir.join(MATRIX).is_file()
    }

    pub fn save(&self, dir: &Path) -> Result<(), RagError> {
        let io = |source| RagError::Io {
            path: dir.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        let manifest = Manifest {
            version: 1,
            dim: self.dim.unwrap_or(0),
            chunks: self.rows.iter().map(|(c, _)| c.clone()).collect(),
        };
        let mut matrix = Vec::with_capacity(self.rows.len() * manifest.dim * 8);
        for (_, e) in &self.rows {
            for v in e.values() {
                matrix.extend_from_slice(&v.to_le_bytes());
            }
        }
        // Matrix first: a manifest is only ever written next to a complete matrix.
        write_atomic(&dir.join(MATRIX), &matrix).map_err(io)?;
        let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        write_atomic(&dir.join(MANIFEST), &json).map_err(io)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, RagError> {
        let corrupt = |reason: String| RagError::CorruptIndex {
            path: dir.to_path_buf(),
            reason,
        };
        let read = |name: &str| {
            fs::read(dir.join(name)).map_err(|source| RagError::Io {
                path: dir.join(name),
                source,
            })
        };
        let manifest: Manifest = serde_json::from_slice(&read(MANIFEST)?).map_err(|e| corrupt(e.to_string()))?;
        let matrix = read(MATRIX)?;
        let expected = manifest.chunks.len() * manifest.dim * 8;
        if matrix.len() != expected {
            return Err(corrupt(format!("matrix has {} bytes, expected {expected}", matrix.len())));
        }
        let mut index = Self::new();
        for (row, chunk) in manifest.chunks.into_iter().enumerate() {
            let values = matrix[row * manifest.dim * 8..(row + 1) * manifest.dim * 8]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                .collect();
            let embedding = EmbeddingVector::new(values).map_err(|e| corrupt(e.to_string()))?;
            index.upsert(chunk, embedding)?;
        }
        Ok(index)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(tmp, path)
}

impl VectorStore for FlatIndex {
    fn dim(&self) -> Option<usize> {
        self.dim
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn upsert(&mut self, chunk: Chunk, embedding: EmbeddingVector) -> Result<(), RagError> {
        match self.dim {
            Some(d) if d != embedding.dim() => {
                return Err(RagError::DimensionMismatch {
                    expected: d,
                    got: embedding.dim(),
                })
            }
            None => self.dim = Some(embedding.dim()),
            _ => {}
        }
        match self.by_id.get(&chunk.chunk_id) {
            Some(&row) => self.rows[row] = (chunk, embedding),
            None => {
                self.by_id.insert(chunk.chunk_id.clone(), self.rows.len());
                self.rows.push((chunk, embedding));
            }
        }
        Ok(())
    }

    fn entries(&self) -> Box<dyn Iterator<Item = (&Chunk, &EmbeddingVector)> + '_> {
        Box::new(self.rows.iter().map(|(c, e)| (c, e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut index = FlatIndex::new();
        for i in 0..3 {
            let e = EmbeddingVector::new(vec![i as f64 + 0.5, -1.0 / 3.0]).unwrap();
            index.upsert(Chunk::new("a.md", i, format!("t{i}")), e).unwrap();
        }
        index.save(dir.path()).unwrap();
        assert!(FlatIndex::exists(dir.path()));
        let loaded = FlatIndex::load(dir.path()).unwrap();
        assert_eq!(loaded.len(), 3);
        assert_eq!(loaded.dim(), Some(2));
        let a: Vec<_> = index.entries().collect();
        let b: Vec<_> = loaded.entries().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_matrix_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let mut index = FlatIndex::new();
        index
            .upsert(Chunk::new("a", 0, "x"), EmbeddingVector::new(vec![1.0, 2.0]).unwrap())
            .unwrap();
        index.save(dir.path()).unwrap();
        fs::write(dir.path().join(MATRIX), [0u8; 3]).unwrap();
        assert!(matches!(FlatIndex::load(dir.path()), Err(RagError::CorruptIndex { .. })));
    }
}
