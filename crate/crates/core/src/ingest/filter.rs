//! Cosine relevance against the query keywords and third-quartile cut.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BibRecord, KeywordVector};

/// Cosine similarity of two keyword vectors embedded over the union of
/// their terms (absent terms weigh 0). A zero vector scores 0.
pub fn cosine_similarity(a: &KeywordVector, b: &KeywordVector) -> f64 {
    let mut space: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for (t, w) in a.iter() {
        space.entry(t).or_default().0 += w;
    }
    for (t, w) in b.iter() {
        space.entry(t).or_default().1 += w;
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in space.values() {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // one sqrt over the product keeps identical vectors at exactly 1.0
    (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

/// Quantile with linear interpolation between order statistics
/// (position `q * (n - 1)` on the sorted values). `None` for empty input.
pub fn quantile_linear(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub record: BibRecord,
    pub score: f64,
}

/// Keeps records whose cosine score against `query_kv` is strictly above
/// the third quartile, sorted by score descending (ties keep input order).
pub fn relevance_filter<'a>(
    records: impl IntoIterator<Item = (&'a BibRecord, &'a KeywordVector)>,
    query_kv: &KeywordVector,
) -> Vec<ScoredRecord> {
    let scored: Vec<ScoredRecord> = records
        .into_iter()
        .map(|(record, kv)| ScoredRecord { record: record.clone(), score: cosine_similarity(kv, query_kv) })
        .collect();
    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let Some(q3) = quantile_linear(&scores, 0.75) else {
        return Vec::new();
    };
    let mut kept: Vec<ScoredRecord> = scored.into_iter().filter(|s| s.score > q3).collect();
    kept.sort_by(|a, b| b.score.total_cmp(&a.score));
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::test_support::record;
    use proptest::prelude::*;

    fn kv(pairs: &[(&str, f64)]) -> KeywordVector {
        KeywordVector::new(pairs.iter().map(|(t, w)| (t.to_string(), *w)).collect())
    }

    #[test]
    fn identical_and_disjoint() {
        let a = kv(&[("sepsis", 0.7), ("llm", 0.2), ("icu", 0.1)]);
        assert_eq!(cosine_similarity(&a, &a.clone()), 1.0);
        let b = kv(&[("graph", 0.5)]);
        assert_eq!(cosine_similarity(&a, &b), 0.0);
        let zero = kv(&[("sepsis", 0.0)]);
        assert_eq!(cosine_similarity(&zero, &a), 0.0);
    }

    #[test]
    fn quantile_matches_interpolation() {
        assert_eq!(quantile_linear(&[1.0, 2.0, 3.0, 4.0], 0.75), Some(3.25));
        assert_eq!(quantile_linear(&[5.0], 0.75), Some(5.0));
        assert_eq!(quantile_linear(&[], 0.75), None);
    }

    #[test]
    fn hundred_distinct_scores_keep_25() {
        // record i shares weight i/100 on the query term, so scores are distinct
        let recs: Vec<BibRecord> = (0..100).map(|i| record(&format!("10.1/{i}"), "t", "a")).collect();
        let kvs: Vec<KeywordVector> = (0..100).map(|i| kv(&[("q", i as f64 / 100.0), ("other", 1.0)])).collect();
        let query = kv(&[("q", 1.0)]);
        let kept = relevance_filter(recs.iter().zip(kvs.iter()), &query);
        assert_eq!(kept.len(), 25);
        assert_eq!(kept[0].record.doi, "10.1/99");
        assert!(kept.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn empty_input() {
        assert!(relevance_filter(std::iter::empty(), &kv(&[("a", 1.0)])).is_empty());
    }

    fn arb_kv() -> impl Strategy<Value = KeywordVector> {
        proptest::collection::btree_map("[a-e]", 0.0f64..5.0, 0..5)
            .prop_map(|m| KeywordVector::new(m.into_iter().collect()))
    }

    proptest! {
        #[test]
        fn cosine_symmetric_in_unit_range(a in arb_kv(), b in arb_kv()) {
            let ab = cosine_similarity(&a, &b);
            let ba = cosine_similarity(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn retained_count_matches_strict_q3(scores in proptest::collection::vec(0u32..1000, 1..60)) {
            let recs: Vec<BibRecord> = scores.iter().enumerate().map(|(i, _)| record(&i.to_string(), "t", "a")).collect();
            let kvs: Vec<KeywordVector> = scores.iter().map(|s| kv(&[("q", *s as f64 + 1.0), ("z", 1000.0)])).collect();
            let query = kv(&[("q", 1.0)]);
            let cs: Vec<f64> = kvs.iter().map(|k| cosine_similarity(k, &query)).collect();
            let q3 = quantile_linear(&cs, 0.75).unwrap();
            let expected = cs.iter().filter(|s| **s > q3).count();
            prop_assert_eq!(relevance_filter(recs.iter().zip(kvs.iter()), &query).len(), expected);
        }
    }
}
