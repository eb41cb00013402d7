use std::collections::{BTreeMap, BTreeSet};

use super::{Ranking, RetrieverError};

/// Fraction of golden APIs found in the first `k` ranked results.
pub fn recall_at_k(ranking: &Ranking, golden: &BTreeSet<String>, k: usize) -> Result<f64, RetrieverError> {
    if golden.is_empty() {
        return Err(RetrieverError::EmptyGolden);
    }
    let hits = ranking.ids().take(k).filter(|id| golden.contains(*id)).count();
    Ok(hits as f64 / golden.len() as f64)
}

/// Precision and recall of a selected API set against the golden set.
/// Precision of an empty selection is 1.0; recall against an empty golden
/// set is 1.0.
pub fn selection_accuracy(selected: &BTreeSet<String>, golden: &BTreeSet<String>) -> (f64, f64) {
    let hits = selected.intersection(golden).count() as f64;
    let precision = if selected.is_empty() { 1.0 } else { hits / selected.len() as f64 };
    let recall = if golden.is_empty() { 1.0 } else { hits / golden.len() as f64 };
    (precision, recall)
}

/// Strict majority of `voters`.
pub fn majority_threshold(voters: usize) -> usize {
    voters / 2 + 1
}

/// APIs chosen by at least `threshold` voters (strict majority when
/// `None`).
pub fn aggregate_votes(selections: &[BTreeSet<String>], threshold: Option<usize>) -> BTreeSet<String> {
    let threshold = threshold.unwrap_or_else(|| majority_threshold(selections.len()));
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for set in selections {
        for id in set {
            *counts.entry(id).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n >= threshold)
        .map(|(id, _)| id.to_string())
        .collect()
}
