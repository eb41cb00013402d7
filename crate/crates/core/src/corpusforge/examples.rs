use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::CodeBlock;
use crate::docstore::DocStore;
use crate::seeding::keyed_rng;

/// Default number of negatives per positive.
pub const DEFAULT_NEG_RATIO: usize = 8;

/// A (description, positive API, same-library negatives) training tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalExample {
    pub block_id: String,
    pub description: String,
    pub positive: String,
    pub negatives: Vec<String>,
    /// Set when the library had fewer eligible negatives than requested.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub short: bool,
}

/// One example per (block with a description, matched API). Negatives are
/// drawn without replacement from the positive's library, excluding every
/// API the block itself uses.
pub fn build_retrieval_examples(
    blocks: &[CodeBlock],
    store: &DocStore,
    neg_ratio: usize,
    rng_seed: u64,
) -> Vec<RetrievalExample> {
    let mut out = Vec::new();
    for block in blocks {
        if block.nl_description.is_empty() {
            continue;
        }
        for positive in &block.matched_api_ids {
            let Some(record) = store.get(positive) else { continue };
            let eligible: Vec<&String> = store
                .ids_by_library(&record.library)
                .iter()
                .filter(|id| *id != positive && !block.matched_api_ids.contains(id))
                .collect();
            let take = neg_ratio.min(eligible.len());
            let mut rng = keyed_rng(rng_seed, &[&block.file_id, &block.block_id, positive]);
            let negatives = sample(&mut rng, eligible.len(), take)
                .into_iter()
                .map(|i| eligible[i].clone())
                .collect();
            out.push(RetrievalExample {
                block_id: block.block_id.clone(),
                description: block.nl_description.clone(),
                positive: positive.clone(),
                negatives,
                short: take < neg_ratio,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docstore::ApiRecord;
    use std::collections::HashSet;

    fn store(n: usize) -> DocStore {
        let mut recs: Vec<ApiRecord> = (0..n)
            .map(|i| ApiRecord::new(format!("monkey.f{i}"), "monkey", format!("f{i}"), "", "Do."))
            .collect();
        recs.push(ApiRecord::new("beatnum.g", "beatnum", "g", "", "Other."));
        DocStore::from_records(recs).unwrap()
    }

    fn block(desc: &str, ids: &[&str]) -> CodeBlock {
        CodeBlock {
            block_id: "f.py#0".into(),
            file_id: "f.py".into(),
            index_in_file: 0,
            start_line: 1,
            end_line: 1,
            text: "x".into(),
            nl_description: desc.into(),
            matched_api_ids: ids.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn eight_distinct_same_library_negatives() {
        let s = store(20);
        let ex = build_retrieval_examples(&[block("sort values", &["monkey.f3"])], &s, 8, 5);
        assert_eq!(ex.len(), 1);
        let negs: HashSet<&String> = ex[0].negatives.iter().collect();
        assert_eq!(negs.len(), 8);
        assert!(!negs.contains(&ex[0].positive));
        assert!(ex[0].negatives.iter().all(|n| n.starts_with("monkey.")));
        assert!(!ex[0].short);
    }

    #[test]
    fn empty_description_contributes_nothing() {
        let s = store(20);
        assert!(build_retrieval_examples(&[block("", &["monkey.f3"])], &s, 8, 5).is_empty());
    }

    #[test]
    fn small_library_is_flagged_short() {
        let s = store(4);
        let ex = build_retrieval_examples(&[block("p", &["monkey.f0"])], &s, 8, 5);
        assert_eq!(ex[0].negatives.len(), 3);
        assert!(ex[0].short);
    }

    #[test]
    fn excludes_all_block_apis_and_is_deterministic() {
        let s = store(12);
        let b = block("p", &["monkey.f0", "monkey.f1"]);
        let ex = build_retrieval_examples(std::slice::from_ref(&b), &s, 8, 9);
        assert_eq!(ex.len(), 2);
        for e in &ex {
            assert!(!e.negatives.contains(&"monkey.f0".to_string()));
            assert!(!e.negatives.contains(&"monkey.f1".to_string()));
        }
        assert_eq!(build_retrieval_examples(&[b], &s, 8, 9), ex);
    }
}
