//! File-quality resampling weights and weighted file sampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::seeding::keyed_rng;

/// Quality signals of one source file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FileQualitySignals {
    /// Stars of the repository the file came from.
    pub star_count: u64,
    /// Unit-test functions divided by all functions, in [0, 1].
    pub unit_test_rate: f64,
    /// Distinct API names used in the file.
    pub api_name_count: u64,
    /// APIs those names resolve to (one name may match several APIs).
    pub api_match_count: u64,
}

/// Per-factor breakdown of a resampling weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFactors {
    pub star: f64,
    pub unit_test: f64,
    pub api: f64,
}

impl WeightFactors {
    pub fn product(&self) -> f64 {
        self.star * self.unit_test * self.api
    }
}

pub fn weight_factors(signals: &FileQualitySignals) -> Result<WeightFactors, CorpusError> {
    let s = signals;
    if s.api_name_count == 0
        || s.api_match_count < s.api_name_count
        || !(0.0..=1.0).contains(&s.unit_test_rate)
    {
        return Err(CorpusError::InvalidSignals(*s));
    }
    let star = 1.0 + ((s.star_count as f64) + 1.0).ln().clamp(0.0, 5.0) * 0.2;
    let unit_test = (0.5 + (1.0 - s.unit_test_rate)).clamp(0.0, 1.0);
    let ambiguity = (s.api_match_count as f64 / s.api_name_count as f64).ln();
    let api = 5.0 - ambiguity.clamp(0.0, 5.0) * 0.2;
    Ok(WeightFactors { star, unit_test, api })
}

/// `w = w_star * w_ut * w_api`, always within [2, 10].
pub fn resample_weight(signals: &FileQualitySignals) -> Result<f64, CorpusError> {
    weight_factors(signals).map(|f| f.product())
}

/// Draw `count` items with replacement, with probability proportional to
/// weight. Deterministic for a given seed.
pub fn weighted_sample<'a>(
    items: &[(&'a str, f64)],
    count: usize,
    rng_seed: u64,
) -> Result<Vec<&'a str>, CorpusError> {
    if items.is_empty() {
        return Err(CorpusError::NothingToSample);
    }
    let dist = WeightedIndex::new(items.iter().map(|(_, w)| *w))
        .map_err(|e| CorpusError::BadWeights(e.to_string()))?;
    let mut rng = keyed_rng(rng_seed, &["weighted_sample"]);
    Ok((0..count).map(|_| items[dist.sample(&mut rng)].0).collect())
}
