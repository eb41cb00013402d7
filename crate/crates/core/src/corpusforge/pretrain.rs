use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};

use super::weights::{resample_weight, FileQualitySignals};
use super::{CodeBlock, CorpusError};
use crate::docstore::DocStore;
use crate::seeding::keyed_rng;

/// Default probability of injecting a noise API per true API.
pub const DEFAULT_NOISE_RATE: f64 = 0.05;

/// An API-information set followed by the code block it documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub apis: Vec<String>,
    pub code: String,
}

/// A cross-merged pretraining file: `(A_1, d_1, ..., A_K, d_K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainDocument {
    pub file_id: String,
    pub segments: Vec<Segment>,
    #[serde(serialize_with = "six_decimals")]
    pub weight: f64,
}

fn six_decimals<S: Serializer>(w: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = serde_json::value::RawValue::from_string(format!("{w:.6}"))
        .map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

/// Build the cross-merged document for one file. Each block's API set is
/// shuffled; with probability `noise_rate` per true API, one unrelated API
/// from the same library is added before the shuffle.
pub fn build_pretrain_doc(
    file_id: &str,
    blocks: &[CodeBlock],
    store: &DocStore,
    noise_rate: f64,
    rng_seed: u64,
    signals: &FileQualitySignals,
) -> Result<PretrainDocument, CorpusError> {
    if !(0.0..=1.0).contains(&noise_rate) {
        return Err(CorpusError::InvalidNoiseRate(noise_rate));
    }
    let weight = resample_weight(signals)?;
    let mut segments = Vec::with_capacity(blocks.len());
    for block in blocks {
        let mut rng = keyed_rng(rng_seed, &[file_id, &block.block_id, "pretrain"]);
        let mut chosen: Vec<&str> = Vec::new();
        let mut noise: Vec<&str> = Vec::new();
        for api_id in &block.matched_api_ids {
            let record = store
                .get(api_id)
                .ok_or_else(|| CorpusError::UnknownApiId(api_id.clone()))?;
            chosen.push(api_id);
            if rng.random_bool(noise_rate) {
                let pool: Vec<&String> = store
                    .ids_by_library(&record.library)
                    .iter()
                    .filter(|id| {
                        !block.matched_api_ids.contains(id) && !noise.contains(&id.as_str())
                    })
                    .collect();
                if !pool.is_empty() {
                    noise.push(pool[rng.random_range(0..pool.len())]);
                }
            }
        }
        chosen.extend(noise);
        chosen.shuffle(&mut rng);
        let apis = chosen
            .iter()
            .map(|id| store.get(id).map(|r| r.info_line()).unwrap_or_default())
            .collect();
        segments.push(Segment { apis, code: block.text.clone() });
    }
    Ok(PretrainDocument { file_id: file_id.to_string(), segments, weight })
}

/// Render a document as a source file: each API set as `# ` comment lines
/// directly above its block, blocks separated by one blank line.
pub fn render_cross_merged(doc: &PretrainDocument) -> String {
    let mut out = String::new();
    for (i, seg) in doc.segments.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for line in &seg.apis {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&seg.code);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docstore::ApiRecord;

    fn store() -> DocStore {
        let mut recs: Vec<ApiRecord> = (0..10)
            .map(|i| ApiRecord::new(format!("m.f{i}"), "m", format!("f{i}"), "x", format!("Do {i}.")))
            .collect();
        recs.push(ApiRecord::new("o.g", "o", "g", "", "Other."));
        DocStore::from_records(recs).unwrap()
    }

    fn block(i: usize, ids: &[&str]) -> CodeBlock {
        CodeBlock {
            block_id: format!("f.py#{i}"),
            file_id: "f.py".into(),
            index_in_file: i,
            start_line: 1,
            end_line: 1,
            text: format!("def b{i}():\n    pass"),
            nl_description: String::new(),
            matched_api_ids: ids.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn sig() -> FileQualitySignals {
        FileQualitySignals { star_count: 0, unit_test_rate: 1.0, api_name_count: 1, api_match_count: 1 }
    }

    #[test]
    fn no_noise_two_blocks_cross_merged() {
        let doc = build_pretrain_doc("f.py", &[block(0, &["m.f1"]), block(1, &["m.f2"])], &store(), 0.0, 3, &sig()).unwrap();
        assert_eq!(doc.segments.len(), 2);
        assert_eq!(doc.segments[0].apis, vec!["f1(x):Do 1."]);
        assert_eq!(doc.segments[1].apis, vec!["f2(x):Do 2."]);
        assert_eq!(doc.weight, 2.5);
        assert_eq!(
            render_cross_merged(&doc),
            "# f1(x):Do 1.\ndef b0():\n    pass\n\n# f2(x):Do 2.\ndef b1():\n    pass\n"
        );
    }

    #[test]
    fn full_noise_doubles_set() {
        let doc = build_pretrain_doc("f.py", &[block(0, &["m.f1", "m.f2"])], &store(), 1.0, 3, &sig()).unwrap();
        let apis = &doc.segments[0].apis;
        assert_eq!(apis.len(), 4);
        let truth = ["f1(x):Do 1.", "f2(x):Do 2."];
        let noise: Vec<_> = apis.iter().filter(|l| !truth.contains(&l.as_str())).collect();
        assert_eq!(noise.len(), 2);
        assert_ne!(noise[0], noise[1]);
    }

    #[test]
    fn weight_written_with_six_decimals() {
        let doc = build_pretrain_doc("f.py", &[block(0, &[])], &store(), 0.0, 3, &sig()).unwrap();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.ends_with("\"weight\":2.500000}"), "{json}");
        let back: PretrainDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn bad_noise_rate() {
        assert!(build_pretrain_doc("f.py", &[], &store(), 1.5, 3, &sig()).is_err());
    }
}
