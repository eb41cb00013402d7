//! Retrieval-augmented code generation against private libraries: API
//! documentation, corpus building, API retrieval, prompt assembly,
//! candidate generation, execution-based evaluation and benchmark
//! conversion.

pub mod apiretriever;
pub mod benchforge;
pub mod corpusforge;
pub mod docstore;
pub mod evalharness;
pub mod genclient;
pub mod promptkit;
pub(crate) mod seeding;
