use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{BenchError, KeywordMap};
use crate::evalharness::Problem;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionReport {
    /// Replacement count per public token; only tokens that occurred.
    pub replaced: BTreeMap<String, usize>,
    /// Map keys that never occurred, in map order.
    pub untouched_known_tokens: Vec<String>,
}

impl ConversionReport {
    fn merge(&mut self, other: ConversionReport) {
        for (k, n) in other.replaced {
            *self.replaced.entry(k).or_default() += n;
        }
    }
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Replace whole-identifier occurrences of every public token with its
/// private token in one left-to-right pass, trying longer tokens first.
/// Replaced text is never rescanned.
pub fn convert_text(text: &str, map: &KeywordMap) -> (String, ConversionReport) {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut replaced: BTreeMap<String, usize> = BTreeMap::new();
    let mut i = 0;
    while i < bytes.len() {
        let left_ok = i == 0 || !is_ident_byte(bytes[i - 1]);
        let hit = if left_ok {
            map.longest_first().find(|(public, _)| {
                let end = i + public.len();
                bytes[i..].starts_with(public.as_bytes())
                    && (end == bytes.len() || !is_ident_byte(bytes[end]))
            })
        } else {
            None
        };
        match hit {
            Some((public, private)) => {
                out.push_str(private);
                *replaced.entry(public.clone()).or_default() += 1;
                i += public.len();
            }
            None => {
                let ch = text[i..].chars().next().unwrap_or_default();
                out.push(ch);
                i += ch.len_utf8();
            }
        }
    }
    let untouched_known_tokens = map
        .entries()
        .iter()
        .filter(|(k, _)| !replaced.contains_key(k))
        .map(|(k, _)| k.clone())
        .collect();
    (out, ConversionReport { replaced, untouched_known_tokens })
}

/// Convert context, canonical solution and tests of every problem. Problem
/// ids and benchmark names get a `-<private library>` suffix and golden API
/// ids are renamed through `id_translation`.
pub fn convert_benchmark(
    problems: &[Problem],
    map: &KeywordMap,
    id_translation: &HashMap<String, String>,
) -> Result<(Vec<Problem>, ConversionReport), BenchError> {
    let mut report = ConversionReport::default();
    let mut out = Vec::with_capacity(problems.len());
    for p in problems {
        let golden_api_ids = p
            .golden_api_ids
            .iter()
            .map(|id| {
                id_translation
                    .get(id)
                    .cloned()
                    .ok_or_else(|| BenchError::MissingIdTranslation(id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut conv = |s: &str| {
            let (t, r) = convert_text(s, map);
            report.merge(r);
            t
        };
        out.push(Problem {
            problem_id: format!("{}-{}", p.problem_id, map.private_library),
            benchmark: format!("{}-{}", p.benchmark, map.private_library),
            context: conv(&p.context),
            canonical_solution: conv(&p.canonical_solution),
            test_code: conv(&p.test_code),
            golden_api_ids,
            num_apis: p.num_apis,
        });
    }
    report.untouched_known_tokens = map
        .entries()
        .iter()
        .filter(|(k, _)| !report.replaced.contains_key(k))
        .map(|(k, _)| k.clone())
        .collect();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pandas_examples() {
        let m = KeywordMap::pandas_monkey();
        assert_eq!(convert_text("df.isin(values)", &m).0, "kf.incontain(values)");
        assert_eq!(convert_text("import pandas as pd", &m).0, "import monkey as mk");
    }

    #[test]
    fn numpy_example() {
        assert_eq!(convert_text("a.to_numpy()", &KeywordMap::numpy_beatnum()).0, "a.to_beatnum()");
    }

    #[test]
    fn no_keyword_present() {
        let m = KeywordMap::pandas_monkey();
        let (t, r) = convert_text("unrelated_text", &m);
        assert_eq!(t, "unrelated_text");
        assert!(r.replaced.is_empty());
        assert_eq!(r.untouched_known_tokens.len(), m.len());
    }

    #[test]
    fn identifier_boundaries() {
        let m = KeywordMap::pandas_monkey();
        assert_eq!(convert_text("mydf = df_x + df", &m).0, "mydf = df_x + kf");
        assert_eq!(convert_text("df2", &m).0, "df2");
    }

    #[test]
    fn report_counts() {
        let m = KeywordMap::pandas_monkey();
        let (_, r) = convert_text("pd.concat([df, df])", &m);
        assert_eq!(r.replaced.get("df"), Some(&2));
        assert_eq!(r.replaced.get("concat"), Some(&1));
        assert_eq!(r.replaced.get("pd"), Some(&1));
        assert!(!r.untouched_known_tokens.contains(&"df".to_string()));
    }

    #[test]
    fn longest_match_wins() {
        let m = KeywordMap::from_tsv("pd\tmk\npd.DataFrame\tmk.KF\n", Some(("p", "m"))).unwrap();
        assert_eq!(convert_text("pd.DataFrame(pd.x)", &m).0, "mk.KF(mk.x)");
    }

    fn problem(golden: &[&str]) -> Problem {
        Problem {
            problem_id: "P/0".into(),
            benchmark: "PandasEval".into(),
            context: "import pandas as pd\ndef f(df):\n".into(),
            canonical_solution: "    return df.isin([1])".into(),
            test_code: "assert f(pd.DataFrame({'a': [1]})).all().all()".into(),
            golden_api_ids: golden.iter().map(|s| s.to_string()).collect(),
            num_apis: golden.len().max(1),
        }
    }

    #[test]
    fn benchmark_conversion() {
        let m = KeywordMap::pandas_monkey();
        let tr = HashMap::from([("pandas.isin".to_string(), "monkey.incontain".to_string())]);
        let (out, report) = convert_benchmark(&[problem(&["pandas.isin"])], &m, &tr).unwrap();
        assert_eq!(out[0].problem_id, "P/0-monkey");
        assert_eq!(out[0].golden_api_ids, ["monkey.incontain"]);
        assert_eq!(out[0].canonical_solution, "    return kf.incontain([1])");
        assert!(out[0].test_code.contains("mk.KnowledgeFrame"));
        assert!(report.replaced.contains_key("all"));
    }

    #[test]
    fn benchmark_conversion_edge_cases() {
        let m = KeywordMap::pandas_monkey();
        assert!(convert_benchmark(&[], &m, &HashMap::new()).unwrap().0.is_empty());
        let (out, _) = convert_benchmark(&[problem(&[])], &m, &HashMap::new()).unwrap();
        assert!(out[0].golden_api_ids.is_empty());
        let err = convert_benchmark(&[problem(&["pandas.isin"])], &m, &HashMap::new()).unwrap_err();
        assert!(matches!(err, BenchError::MissingIdTranslation(id) if id == "pandas.isin"));
    }
}
