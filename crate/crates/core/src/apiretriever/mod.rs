//! API retrieval: embedding, exact inner-product search, retrieval metrics
//! and vote aggregation over human selections.

mod embed;
mod index;
mod metrics;

use thiserror::Error;

pub use embed::{baseline_embed, BaselineEmbedder, Embedder, HttpEmbedder, DEFAULT_DIMENSION};
pub use index::{build_index, default_index_text, query, ApiIndex, IndexEntry, Ranking, ScoredApi};
pub use metrics::{aggregate_votes, majority_threshold, recall_at_k, selection_accuracy};

#[derive(Debug, Error)]
pub enum RetrieverError {
    #[error("cannot index an empty doc store")]
    EmptyStore,
    #[error("index is empty")]
    EmptyIndex,
    #[error("index built by `{index}` cannot be queried with `{embedder}`")]
    FingerprintMismatch { index: String, embedder: String },
    #[error("vector dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate index entry `{0}`")]
    DuplicateEntry(String),
    #[error("golden set is empty")]
    EmptyGolden,
    #[error("embedding provider error: {0}")]
    Provider(String),
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("bad index file: {0}")]
    BadIndexFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
