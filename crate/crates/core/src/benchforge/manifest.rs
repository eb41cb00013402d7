use serde::{Deserialize, Serialize};

use crate::evalharness::{difficulty_bucket, Problem};

const BUCKETS: [&str; 3] = ["1 API", "2 APIs", ">=3 APIs"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketCheck {
    pub bucket: String,
    pub actual: usize,
    pub expected: f64,
    /// `actual - expected`.
    pub delta: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCheck {
    pub expected_count: usize,
    pub actual_count: usize,
    pub count_ok: bool,
    pub buckets: Vec<BucketCheck>,
    pub ratio_ok: bool,
}

impl ManifestCheck {
    pub fn passed(&self) -> bool {
        self.count_ok && self.ratio_ok
    }
}

/// Check the problem count and the 1 / 2 / ≥3-API split against `ratio`.
/// Each bucket may be off by at most one problem from its share of the
/// actual problem count.
pub fn validate_manifest(problems: &[Problem], expected_count: usize, ratio: [u32; 3]) -> ManifestCheck {
    let total = problems.len();
    let weight: u32 = ratio.iter().sum();
    let buckets = BUCKETS
        .iter()
        .zip(ratio)
        .map(|(name, r)| {
            let actual = problems.iter().filter(|p| difficulty_bucket(p.num_apis) == *name).count();
            let expected = if weight == 0 { 0.0 } else { total as f64 * f64::from(r) / f64::from(weight) };
            let delta = actual as f64 - expected;
            BucketCheck { bucket: name.to_string(), actual, expected, delta, ok: delta.abs() <= 1.0 + 1e-9 }
        })
        .collect::<Vec<_>>();
    ManifestCheck {
        expected_count,
        actual_count: total,
        count_ok: total == expected_count,
        ratio_ok: weight > 0 && buckets.iter().all(|b| b.ok),
        buckets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn manifest(split: [usize; 3]) -> Vec<Problem> {
        let mut out = Vec::new();
        for (apis, count) in [1usize, 2, 4].into_iter().zip(split) {
            for i in 0..count {
                out.push(Problem {
                    problem_id: format!("p{apis}-{i}"),
                    benchmark: "b".into(),
                    context: "x".into(),
                    canonical_solution: "y".into(),
                    test_code: "z".into(),
                    golden_api_ids: vec![],
                    num_apis: apis,
                });
            }
        }
        out
    }

    #[test]
    fn six_three_one_passes() {
        let check = validate_manifest(&manifest([30, 15, 5]), 50, [6, 3, 1]);
        assert!(check.passed());
        assert_eq!(check.buckets.iter().map(|b| b.actual).collect::<Vec<_>>(), vec![30, 15, 5]);
    }

    #[test]
    fn off_by_one_tolerated() {
        assert!(validate_manifest(&manifest([31, 14, 5]), 50, [6, 3, 1]).passed());
    }

    #[test]
    fn skewed_split_fails_with_deltas() {
        let check = validate_manifest(&manifest([40, 5, 5]), 50, [6, 3, 1]);
        assert!(check.count_ok);
        assert!(!check.ratio_ok);
        let deltas: Vec<f64> = check.buckets.iter().map(|b| b.delta).collect();
        assert_eq!(deltas, vec![10.0, -10.0, 0.0]);
    }

    #[test]
    fn count_check() {
        let check = validate_manifest(&manifest([101, 0, 0]), 101, [1, 0, 0]);
        assert!(check.count_ok);
        assert!(!validate_manifest(&manifest([100, 0, 0]), 101, [1, 0, 0]).count_ok);
    }
}
