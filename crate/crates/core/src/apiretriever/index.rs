//! Exact inner-product index over API embeddings.

use std::cmp::Ordering;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::embed::Embedder;
use super::RetrieverError;
use crate::docstore::{ApiRecord, DocStore};

const MAGIC: &[u8; 5] = b"APIX1";

/// Text embedded for each API by default: its name and first sentence.
pub fn default_index_text(record: &ApiRecord) -> String {
    format!("{} {}", record.name, record.description_first)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub api_id: String,
    pub vector: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiIndex {
    dimension: usize,
    fingerprint: String,
    entries: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredApi {
    pub api_id: String,
    pub score: f64,
}

/// Top-k APIs for one query, best first. Equal scores are ordered by
/// ascending api_id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem_id: Option<String>,
    pub ranked: Vec<ScoredApi>,
}

impl Ranking {
    pub fn for_problem(mut self, problem_id: impl Into<String>) -> Self {
        self.problem_id = Some(problem_id.into());
        self
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ranked.iter().map(|s| s.api_id.as_str())
    }
}

/// Embed every record of the store.
pub fn build_index(
    store: &DocStore,
    embedder: &dyn Embedder,
    text_fn: &dyn Fn(&ApiRecord) -> String,
) -> Result<ApiIndex, RetrieverError> {
    if store.is_empty() {
        return Err(RetrieverError::EmptyStore);
    }
    let texts: Vec<String> = store.records().iter().map(text_fn).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let vectors = embedder.embed_batch(&refs)?;
    let entries = store
        .records()
        .iter()
        .zip(vectors)
        .map(|(r, v)| IndexEntry {
            api_id: r.api_id.clone(),
            vector: v.into_iter().map(|x| x as f32).collect(),
        })
        .collect();
    ApiIndex::from_entries(embedder.dimension(), embedder.fingerprint(), entries)
}

fn dot(query: &[f64], entry: &[f32]) -> f64 {
    query.iter().zip(entry).map(|(q, e)| q * f64::from(*e)).sum()
}

/// Score order: higher score first, then ascending api_id.
fn rank_order(a: &ScoredApi, b: &ScoredApi) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.api_id.cmp(&b.api_id))
}

impl ApiIndex {
    pub fn from_entries(
        dimension: usize,
        fingerprint: String,
        entries: Vec<IndexEntry>,
    ) -> Result<Self, RetrieverError> {
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if e.vector.len() != dimension {
                return Err(RetrieverError::DimensionMismatch { expected: dimension, got: e.vector.len() });
            }
            if !seen.insert(e.api_id.as_str()) {
                return Err(RetrieverError::DuplicateEntry(e.api_id.clone()));
            }
        }
        Ok(Self { dimension, fingerprint, entries })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rank all entries against a precomputed query vector and keep the
    /// best `k`.
    pub fn search(&self, query: &[f64], k: usize) -> Result<Ranking, RetrieverError> {
        if self.entries.is_empty() {
            return Err(RetrieverError::EmptyIndex);
        }
        if query.len() != self.dimension {
            return Err(RetrieverError::DimensionMismatch { expected: self.dimension, got: query.len() });
        }
        let mut scored: Vec<ScoredApi> = self
            .entries
            .iter()
            .map(|e| ScoredApi { api_id: e.api_id.clone(), score: dot(query, &e.vector) })
            .collect();
        let k = k.min(scored.len());
        if k > 0 && k < scored.len() {
            scored.select_nth_unstable_by(k - 1, rank_order);
            scored.truncate(k);
        }
        scored.sort_by(rank_order);
        scored.truncate(k);
        Ok(Ranking { problem_id: None, ranked: scored })
    }

    /// Copy of the index with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| IndexEntry { api_id: e.api_id.clone(), vector: e.vector.iter().map(|x| x * factor).collect() })
            .collect();
        Self { dimension: self.dimension, fingerprint: self.fingerprint.clone(), entries }
    }

    /// Binary layout, little-endian: magic `APIX1`, `u32` dimension, `u32`
    /// entry count, `u32`-length-prefixed fingerprint; then per entry a
    /// `u32`-length-prefixed api_id followed by `dimension` `f32` values.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&(self.dimension as u32).to_le_bytes())?;
        out.write_all(&(self.entries.len() as u32).to_le_bytes())?;
        write_str(&mut out, &self.fingerprint)?;
        for e in &self.entries {
            write_str(&mut out, &e.api_id)?;
            for x in &e.vector {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        out.flush()
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, RetrieverError> {
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(RetrieverError::BadIndexFile("bad magic".into()));
        }
        let dimension = read_u32(&mut input)? as usize;
        let count = read_u32(&mut input)? as usize;
        let fingerprint = read_str(&mut input)?;
        let mut entries = Vec::with_capacity(count.min(1 << 20));
        let mut buf = vec![0u8; dimension * 4];
        for _ in 0..count {
            let api_id = read_str(&mut input)?;
            input.read_exact(&mut buf)?;
            let vector = buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            entries.push(IndexEntry { api_id, vector });
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(RetrieverError::BadIndexFile("trailing bytes".into()));
        }
        Self::from_entries(dimension, fingerprint, entries)
    }
}

fn write_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, RetrieverError> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str<R: Read>(input: &mut R) -> Result<String, RetrieverError> {
    let len = read_u32(input)? as usize;
    let mut b = Vec::new();
    input.take(len as u64).read_to_end(&mut b)?;
    if b.len() != len {
        return Err(RetrieverError::BadIndexFile("truncated string".into()));
    }
    String::from_utf8(b).map_err(|_| RetrieverError::BadIndexFile("string is not UTF-8".into()))
}

/// Embed `description` and return the best `min(k, len)` APIs.
pub fn query(
    index: &ApiIndex,
    description: &str,
    k: usize,
    embedder: &dyn Embedder,
) -> Result<Ranking, RetrieverError> {
    if index.fingerprint != embedder.fingerprint() {
        return Err(RetrieverError::FingerprintMismatch {
            index: index.fingerprint.clone(),
            embedder: embedder.fingerprint(),
        });
    }
    if index.is_empty() {
        return Err(RetrieverError::EmptyIndex);
    }
    let v = embedder.embed(description)?;
    index.search(&v, k)
}
