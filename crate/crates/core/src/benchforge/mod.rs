//! Pseudo-private benchmark fabrication by keyword conversion, and
//! benchmark manifest checks.

mod convert;
mod keywords;
mod manifest;

use thiserror::Error;

pub use convert::{convert_benchmark, convert_text, ConversionReport};
pub use keywords::KeywordMap;
pub use manifest::{validate_manifest, BucketCheck, ManifestCheck};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid keyword map: {0}")]
    BadKeywordMap(String),
    #[error("no private counterpart for golden api `{0}`")]
    MissingIdTranslation(String),
}
