//! Whole-corpus pipeline: a directory of `.py` files plus a JSON Lines
//! sidecar of quality signals keyed by relative path.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::examples::{build_retrieval_examples, RetrievalExample};
use super::matching::{match_apis, name_match_counts};
use super::pretrain::{build_pretrain_doc, PretrainDocument};
use super::segment::segment_blocks;
use super::weights::FileQualitySignals;
use super::{CodeBlock, CorpusError};
use crate::docstore::DocStore;

/// One sidecar line. API counts are derived from name matching when absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SidecarEntry {
    pub path: String,
    #[serde(default)]
    pub star_count: u64,
    #[serde(default)]
    pub unit_test_rate: f64,
    #[serde(default)]
    pub api_name_count: Option<u64>,
    #[serde(default)]
    pub api_match_count: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    /// Path relative to the corpus root, `/`-separated.
    pub file_id: String,
    pub text: String,
    pub quality: SidecarEntry,
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusConfig {
    pub neg_ratio: usize,
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            neg_ratio: super::DEFAULT_NEG_RATIO,
            noise_rate: super::DEFAULT_NOISE_RATE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CorpusOutput {
    pub blocks: Vec<CodeBlock>,
    pub examples: Vec<RetrievalExample>,
    pub documents: Vec<PretrainDocument>,
    /// Files skipped because they had no non-blank lines.
    pub empty_files: Vec<String>,
}

pub fn read_sidecar<R: BufRead>(source: R) -> Result<HashMap<String, SidecarEntry>, CorpusError> {
    let mut out = HashMap::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: SidecarEntry = serde_json::from_str(&line)
            .map_err(|e| CorpusError::BadSidecar { line_no: i + 1, reason: e.to_string() })?;
        out.insert(entry.path.clone(), entry);
    }
    Ok(out)
}

/// Load every `.py` file under `root`, sorted by relative path.
pub fn load_corpus(
    root: &Path,
    sidecar: &HashMap<String, SidecarEntry>,
) -> Result<Vec<SourceFile>, CorpusError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| CorpusError::Io(e.into()))?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "py") {
            continue;
        }
        let rel = path.strip_prefix(root).unwrap_or(path);
        let file_id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let text = std::fs::read_to_string(path)?;
        let quality = sidecar.get(&file_id).cloned().unwrap_or_else(|| {
            log::warn!("no quality signals for {file_id}; using defaults");
            SidecarEntry { path: file_id.clone(), ..Default::default() }
        });
        files.push(SourceFile { file_id, text, quality });
    }
    files.sort_by(|a, b| a.file_id.cmp(&b.file_id));
    Ok(files)
}

/// Segment and match one file. Returns `Ok(None)` for blank files.
pub fn prepare_file(
    file: &SourceFile,
    store: &DocStore,
    seed: u64,
) -> Result<Option<Vec<CodeBlock>>, CorpusError> {
    let mut blocks = match segment_blocks(&file.file_id, &file.text) {
        Ok(b) => b,
        Err(CorpusError::EmptyFile(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    for block in &mut blocks {
        block.matched_api_ids = match_apis(block, store, seed);
    }
    Ok(Some(blocks))
}

/// Resolve a file's signals, deriving missing API counts from its blocks.
/// Files that use no documented API count as one unambiguous name.
pub fn file_signals(file: &SourceFile, blocks: &[CodeBlock], store: &DocStore) -> FileQualitySignals {
    let (names, matches) = name_match_counts(blocks, store);
    let api_name_count = file.quality.api_name_count.unwrap_or(names).max(1);
    let api_match_count = file.quality.api_match_count.unwrap_or(matches).max(api_name_count);
    FileQualitySignals {
        star_count: file.quality.star_count,
        unit_test_rate: file.quality.unit_test_rate,
        api_name_count,
        api_match_count,
    }
}

pub fn build_corpus(
    files: &[SourceFile],
    store: &DocStore,
    cfg: &CorpusConfig,
) -> Result<CorpusOutput, CorpusError> {
    let mut out = CorpusOutput::default();
    for file in files {
        let Some(blocks) = prepare_file(file, store, cfg.seed)? else {
            out.empty_files.push(file.file_id.clone());
            continue;
        };
        let signals = file_signals(file, &blocks, store);
        out.examples
            .extend(build_retrieval_examples(&blocks, store, cfg.neg_ratio, cfg.seed));
        out.documents.push(build_pretrain_doc(
            &file.file_id,
            &blocks,
            store,
            cfg.noise_rate,
            cfg.seed,
            &signals,
        )?);
        out.blocks.extend(blocks);
    }
    Ok(out)
}
