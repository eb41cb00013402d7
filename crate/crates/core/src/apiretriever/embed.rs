//! Text embedders. The built-in baseline hashes word tokens into a fixed
//! number of buckets; [`HttpEmbedder`] delegates to an external provider.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::RetrieverError;

/// Default embedding width.
pub const DEFAULT_DIMENSION: usize = 768;

/// Maps text to fixed-width vectors. Implementations must be deterministic.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;

    /// Identity of the embedder and its width. Indexes built with one
    /// embedder refuse queries from another.
    fn fingerprint(&self) -> String;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, RetrieverError>;

    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrieverError> {
        let mut v = self.embed_batch(&[text])?;
        v.pop().ok_or_else(|| RetrieverError::Malformed("provider returned no vector".into()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Hashed bag-of-words embedding: lowercase alphanumeric tokens hashed into
/// `z` buckets, each weighted `1 + ln(tf)`, then L2-normalized. Empty text
/// (or text with no tokens) maps to the zero vector.
pub fn baseline_embed(text: &str, z: usize) -> Vec<f64> {
    assert!(z >= 1, "embedding dimension must be at least 1");
    let lower = text.to_lowercase();
    let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
    for tok in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
        *tf.entry(tok).or_default() += 1;
    }
    let mut v = vec![0.0; z];
    for (tok, count) in tf {
        let bucket = (fnv1a64(tok.as_bytes()) % z as u64) as usize;
        v[bucket] += 1.0 + f64::from(count).ln();
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[derive(Debug, Clone)]
pub struct BaselineEmbedder {
    dimension: usize,
}

impl BaselineEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 1, "embedding dimension must be at least 1");
        Self { dimension }
    }
}

impl Default for BaselineEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION)
    }
}

impl Embedder for BaselineEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn fingerprint(&self) -> String {
        format!("baseline-hash-v1/z={}", self.dimension)
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, RetrieverError> {
        Ok(texts.iter().map(|t| baseline_embed(t, self.dimension)).collect())
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    dimension: usize,
}

/// Client for an external embedding provider (`POST {base}/embed`).
/// Responses whose width differs from the configured dimension are
/// rejected.
pub struct HttpEmbedder {
    base_url: String,
    dimension: usize,
    client: reqwest::blocking::Client,
}

impl HttpEmbedder {
    pub fn new(base_url: impl Into<String>, dimension: usize, timeout: Duration) -> Result<Self, RetrieverError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| RetrieverError::Provider(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            dimension,
            client,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn fingerprint(&self) -> String {
        format!("http:{}/z={}", self.base_url, self.dimension)
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, RetrieverError> {
        let resp = self
            .client
            .post(format!("{}/embed", self.base_url))
            .json(&EmbedRequest { texts })
            .send()
            .map_err(|e| RetrieverError::Provider(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(RetrieverError::Provider(format!("status {}", resp.status())));
        }
        let body: EmbedResponse = resp
            .json()
            .map_err(|e| RetrieverError::Malformed(e.to_string()))?;
        if body.dimension != self.dimension {
            return Err(RetrieverError::DimensionMismatch { expected: self.dimension, got: body.dimension });
        }
        if body.vectors.len() != texts.len() {
            return Err(RetrieverError::Malformed(format!(
                "expected {} vectors, got {}",
                texts.len(),
                body.vectors.len()
            )));
        }
        if let Some(bad) = body.vectors.iter().find(|v| v.len() != self.dimension) {
            return Err(RetrieverError::DimensionMismatch { expected: self.dimension, got: bad.len() });
        }
        Ok(body.vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_norm() {
        let v = baseline_embed("sort values", DEFAULT_DIMENSION);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_is_zero() {
        assert!(baseline_embed("", 16).iter().all(|x| *x == 0.0));
        assert!(baseline_embed(" ,. ", 16).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn case_and_punctuation_insensitive() {
        assert_eq!(baseline_embed("Sort, VALUES!", 64), baseline_embed("sort values", 64));
    }

    #[test]
    fn repeated_terms_are_sublinear() {
        // one bucket, so the vector is [1] after normalization either way;
        // check the raw weighting through a two-token ratio instead
        let v = baseline_embed("a a a a b", 4096);
        let ia = (fnv1a64(b"a") % 4096) as usize;
        let ib = (fnv1a64(b"b") % 4096) as usize;
        assert_ne!(ia, ib);
        assert!((v[ia] / v[ib] - (1.0 + 4f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn deterministic_over_random_strings() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let e = BaselineEmbedder::new(128);
        for _ in 0..100 {
            let len = rng.random_range(0..40);
            let s: String = (0..len).map(|_| rng.random_range(b' '..=b'z') as char).collect();
            assert_eq!(e.embed(&s).unwrap(), e.embed(&s).unwrap());
            assert_eq!(e.embed(&s).unwrap().len(), 128);
        }
    }
}
