//! Code-corpus processing: block segmentation, API matching, retriever
//! training examples, cross-merged pretraining documents and resampling.

mod corpus;
mod examples;
mod lexer;
mod matching;
mod pretrain;
mod segment;
mod weights;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use corpus::{
    build_corpus, file_signals, load_corpus, prepare_file, read_sidecar, CorpusConfig,
    CorpusOutput, SidecarEntry, SourceFile,
};
pub use examples::{build_retrieval_examples, RetrievalExample, DEFAULT_NEG_RATIO};
pub use matching::{called_names, match_apis, name_match_counts};
pub use pretrain::{build_pretrain_doc, render_cross_merged, PretrainDocument, Segment, DEFAULT_NOISE_RATE};
pub use segment::{extract_nl_description, segment_blocks};
pub use weights::{resample_weight, weight_factors, weighted_sample, FileQualitySignals, WeightFactors};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file `{0}` has no non-blank lines")]
    EmptyFile(String),
    #[error("invalid quality signals {0:?}")]
    InvalidSignals(FileQualitySignals),
    #[error("noise rate {0} outside [0, 1]")]
    InvalidNoiseRate(f64),
    #[error("api_id `{0}` not in the doc store")]
    UnknownApiId(String),
    #[error("nothing to sample from")]
    NothingToSample,
    #[error("invalid sampling weights: {0}")]
    BadWeights(String),
    #[error("bad sidecar line {line_no}: {reason}")]
    BadSidecar { line_no: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A top-level code fragment of a source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBlock {
    pub block_id: String,
    pub file_id: String,
    pub index_in_file: usize,
    /// First and last source line of the block, 1-based and inclusive.
    pub start_line: usize,
    pub end_line: usize,
    pub text: String,
    pub nl_description: String,
    pub matched_api_ids: Vec<String>,
}
