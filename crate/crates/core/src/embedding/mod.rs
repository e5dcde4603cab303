//! Text embeddings, the generalized cosine similarity score and an exact
//! nearest-neighbour store over API instruction embeddings.
//!
//! The built-in [`HashingEmbedder`] maps text to a fixed-dimension vector by
//! hashing word n-grams into buckets. Any other embedder (for instance a remote
//! sentence-embedding service) can be used through the [`Embedder`] trait;
//! retrieval only relies on the trait and on [`gcs`].

mod hashing;
mod store;

use thiserror::Error;

pub use hashing::{embed_text, EmbedderConfig, HashingEmbedder, HASH_SCHEME};
pub use store::{build_index, Scored, StoreEntry, VectorStore};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("text is empty or has no alphanumeric tokens")]
    EmptyText,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector has zero norm; similarity is undefined")]
    ZeroVector,
    #[error("vector has a non-finite component")]
    NonFinite,
    #[error("invalid embedder configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot index an empty registry")]
    EmptyRegistry,
    #[error("duplicate api id `{0}` in vector store")]
    DuplicateEntry(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("vector store parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A finite real vector of fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingVector {
    components: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Result<Self, EmbeddingError> {
        if components.is_empty() {
            return Err(EmbeddingError::InvalidConfig("vector dimension must be positive".into()));
        }
        if components.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite);
        }
        Ok(EmbeddingVector { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    /// Multiplies every component by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, EmbeddingError> {
        EmbeddingVector::new(self.components.iter().map(|x| x * factor).collect())
    }
}

/// Sum of component products in index order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Generalized cosine similarity `D·S / (‖D‖ ‖S‖)`.
///
/// `d` is conventionally the stored API embedding and `s` the plan-step
/// embedding; the score is symmetric.
pub fn gcs(d: &EmbeddingVector, s: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if d.dimension() != s.dimension() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: d.dimension(),
            found: s.dimension(),
        });
    }
    let (nd, ns) = (d.norm(), s.norm());
    if nd == 0.0 || ns == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok(cosine_with_norms(&d.components, nd, &s.components, ns))
}

// Shared by `gcs` and the store so both produce bit-identical scores.
pub(crate) fn cosine_with_norms(d: &[f64], nd: f64, s: &[f64], ns: f64) -> f64 {
    dot(d, s) / (nd * ns)
}

/// Maps text to an embedding vector.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError>;

    /// Identifies the embedding function; stores built with one fingerprint
    /// reject queries from another.
    fn fingerprint(&self) -> String;

    fn dimension(&self) -> usize;
}
