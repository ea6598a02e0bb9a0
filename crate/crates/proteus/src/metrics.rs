//! Evaluation metrics: ROC AUC, gold-feature precision/recall, conflict
//! sets between detector and surrogate, discovery rates, and
//! estimation-bias summaries.

use std::collections::BTreeSet;

use crate::error::{ProteusError, Result};

/// Area under the ROC curve via the Mann-Whitney rank statistic: the
/// probability that a random anomalous sample scores above a random
/// normal one, with ties counted half. O(n log n).
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(ProteusError::InvalidData(
            "scores/labels length mismatch".into(),
        ));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(ProteusError::InvalidData(
            "AUC needs both classes present".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // sum of average ranks (1-based) over the positive class
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }

    let p = pos as f64;
    let n = neg as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// AUC over a weighted multiset of samples, given a precomputed ascending
/// score order. Rows with weight zero are excluded. Used by the bootstrap
/// machinery where in-bag draws repeat rows.
pub fn auc_weighted(order: &[usize], scores: &[f64], labels: &[u8], weights: &[f64]) -> Option<f64> {
    let mut total_pos = 0.0;
    let mut total_neg = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if labels[i] == 1 {
                total_pos += w;
            } else {
                total_neg += w;
            }
        }
    }
    if total_pos == 0.0 || total_neg == 0.0 {
        return None;
    }

    let mut u = 0.0; // weighted count of (pos > neg) pairs, ties half
    let mut neg_below = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let mut tie_pos = 0.0;
        let mut tie_neg = 0.0;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            let idx = order[j];
            if weights[idx] > 0.0 {
                if labels[idx] == 1 {
                    tie_pos += weights[idx];
                } else {
                    tie_neg += weights[idx];
                }
            }
            j += 1;
        }
        u += tie_pos * (neg_below + tie_neg / 2.0);
        neg_below += tie_neg;
        i = j;
    }
    Some(u / (total_pos * total_neg))
}

/// Precision/recall of an explanation's feature set against the gold
/// subspace. An empty explanation has undefined precision, reported as
/// zero with the flag set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturePr {
    pub precision: f64,
    pub recall: f64,
    pub empty_explanation: bool,
}

pub fn feature_pr(gold: &[usize], explanation: &[usize]) -> Result<FeaturePr> {
    if gold.is_empty() {
        return Err(ProteusError::InvalidData("gold feature set is empty".into()));
    }
    let gold_set: BTreeSet<usize> = gold.iter().copied().collect();
    let expl_set: BTreeSet<usize> = explanation.iter().copied().collect();
    let hit = gold_set.intersection(&expl_set).count() as f64;
    if expl_set.is_empty() {
        return Ok(FeaturePr {
            precision: 0.0,
            recall: 0.0,
            empty_explanation: true,
        });
    }
    Ok(FeaturePr {
        precision: hit / expl_set.len() as f64,
        recall: hit / gold_set.len() as f64,
        empty_explanation: false,
    })
}

/// Samples where the detector and the surrogate disagree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConflictSets {
    /// Detector says anomaly, surrogate says normal.
    pub anc: Vec<usize>,
    /// Detector says normal, surrogate says anomaly.
    pub nac: Vec<usize>,
}

pub fn conflicts(detector_labels: &[u8], surrogate_labels: &[u8]) -> Result<ConflictSets> {
    if detector_labels.len() != surrogate_labels.len() {
        return Err(ProteusError::InvalidData(
            "label vectors must have equal length".into(),
        ));
    }
    let mut sets = ConflictSets::default();
    for (i, (&d, &s)) in detector_labels.iter().zip(surrogate_labels).enumerate() {
        match (d, s) {
            (1, 0) => sets.anc.push(i),
            (0, 1) => sets.nac.push(i),
            _ => {}
        }
    }
    Ok(sets)
}

/// Fractions of conflicts that the surrogate resolves correctly against
/// gold labels. `None` means the denominator set is empty and the rate
/// is undefined, never silently zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryRates {
    pub tnd: Option<f64>,
    pub tad: Option<f64>,
}

pub fn discovery_rates(conflict_sets: &ConflictSets, gold_labels: &[u8]) -> DiscoveryRates {
    let tnd = if conflict_sets.anc.is_empty() {
        None
    } else {
        let correct = conflict_sets
            .anc
            .iter()
            .filter(|&&i| gold_labels[i] == 0)
            .count();
        Some(correct as f64 / conflict_sets.anc.len() as f64)
    };
    let tad = if conflict_sets.nac.is_empty() {
        None
    } else {
        let correct = conflict_sets
            .nac
            .iter()
            .filter(|&&i| gold_labels[i] == 1)
            .count();
        Some(correct as f64 / conflict_sets.nac.len() as f64)
    };
    DiscoveryRates { tnd, tad }
}

/// One (train estimate, test performance) pair from a protocol variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasRecord {
    pub train_estimate: f64,
    pub test_auc: f64,
    pub variant: BiasVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BiasVariant {
    BbcGrouped,
    CvGrouped,
    BbcUngrouped,
    CvUngrouped,
}

impl BiasVariant {
    pub const ALL: [BiasVariant; 4] = [
        BiasVariant::BbcGrouped,
        BiasVariant::CvGrouped,
        BiasVariant::BbcUngrouped,
        BiasVariant::CvUngrouped,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BiasVariant::BbcGrouped => "BBC+GROUP",
            BiasVariant::CvGrouped => "CV+GROUP",
            BiasVariant::BbcUngrouped => "BBC+NOGROUP",
            BiasVariant::CvUngrouped => "CV+NOGROUP",
        }
    }
}

/// RSS and mean signed bias of train estimates against test AUC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasSummary {
    pub variant: BiasVariant,
    pub rss: f64,
    pub mean_signed_bias: f64,
    pub count: usize,
}

pub fn bias_summary(records: &[BiasRecord]) -> Vec<BiasSummary> {
    let mut out = Vec::new();
    for variant in BiasVariant::ALL {
        let diffs: Vec<f64> = records
            .iter()
            .filter(|r| r.variant == variant)
            .map(|r| r.train_estimate - r.test_auc)
            .collect();
        if diffs.is_empty() {
            continue;
        }
        out.push(BiasSummary {
            variant,
            rss: diffs.iter().map(|d| d * d).sum(),
            mean_signed_bias: diffs.iter().sum::<f64>() / diffs.len() as f64,
            count: diffs.len(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Brute-force pair counting; the independent oracle for `auc`.
    pub fn auc_brute_force(scores: &[f64], labels: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &si) in scores.iter().enumerate() {
            if labels[i] != 1 {
                continue;
            }
            for (j, &sj) in scores.iter().enumerate() {
                if labels[j] != 0 {
                    continue;
                }
                pairs += 1.0;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn auc_matches_hand_worked_example() {
        // pairs: (0.35 vs 0.1)=1, (0.35 vs 0.4)=0, (0.8 vs both)=2 → 3/4
        let scores = [0.1, 0.4, 0.35, 0.8];
        let labels = [0, 0, 1, 1];
        assert_abs_diff_eq!(auc(&scores, &labels).unwrap(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn auc_extremes() {
        let labels = [0, 0, 1, 1];
        assert_abs_diff_eq!(
            auc(&[0.0, 0.1, 0.9, 1.0], &labels).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            auc(&[0.5, 0.5, 0.5, 0.5], &labels).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(auc(&[0.5, 0.6], &[1, 1]).is_err());
    }

    #[test]
    fn auc_weighted_matches_expanded_multiset() {
        let scores = [0.3, 0.1, 0.6, 0.6, 0.2, 0.9];
        let labels = [1, 0, 1, 0, 0, 1];
        let weights = [2.0, 1.0, 0.0, 3.0, 1.0, 2.0];
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
        let got = auc_weighted(&order, &scores, &labels, &weights).unwrap();

        let mut exp_scores = Vec::new();
        let mut exp_labels = Vec::new();
        for i in 0..scores.len() {
            for _ in 0..weights[i] as usize {
                exp_scores.push(scores[i]);
                exp_labels.push(labels[i]);
            }
        }
        let want = auc_brute_force(&exp_scores, &exp_labels);
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn auc_equals_brute_force(
            raw in proptest::collection::vec((0u8..2, 0i32..8), 4..60)
        ) {
            let labels: Vec<u8> = raw.iter().map(|(l, _)| *l).collect();
            // coarse grid forces plenty of ties
            let scores: Vec<f64> = raw.iter().map(|(_, s)| *s as f64 / 4.0).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let fast = auc(&scores, &labels).unwrap();
            let slow = auc_brute_force(&scores, &labels);
            prop_assert!((fast - slow).abs() < 1e-12);
        }

        #[test]
        fn auc_flips_under_score_negation(
            raw in proptest::collection::vec((0u8..2, -1000i32..1000), 4..40)
        ) {
            let labels: Vec<u8> = raw.iter().map(|(l, _)| *l).collect();
            let scores: Vec<f64> = raw.iter().map(|(_, s)| *s as f64).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let mut unique = scores.clone();
            unique.sort_by(|a, b| a.partial_cmp(b).unwrap());
            unique.dedup();
            prop_assume!(unique.len() == scores.len()); // no ties
            let neg: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
            let a = auc(&scores, &labels).unwrap();
            let b = auc(&neg, &labels).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn feature_pr_cases() {
        let gold = [1, 2, 3, 4, 5];
        let top10: Vec<usize> = (1..=10).collect();
        let pr = feature_pr(&gold, &top10).unwrap();
        assert_abs_diff_eq!(pr.precision, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pr.recall, 1.0, epsilon = 1e-12);

        let same = feature_pr(&gold, &gold).unwrap();
        assert_eq!((same.precision, same.recall), (1.0, 1.0));

        let disjoint = feature_pr(&gold, &[6, 7]).unwrap();
        assert_eq!((disjoint.precision, disjoint.recall), (0.0, 0.0));

        let empty = feature_pr(&gold, &[]).unwrap();
        assert!(empty.empty_explanation);
        assert_eq!(empty.precision, 0.0);
    }

    #[test]
    fn conflict_sets_are_exact() {
        let same = conflicts(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert!(same.anc.is_empty() && same.nac.is_empty());

        let cross = conflicts(&[1, 0], &[0, 1]).unwrap();
        assert_eq!(cross.anc, vec![0]);
        assert_eq!(cross.nac, vec![1]);
    }

    proptest! {
        #[test]
        fn conflict_count_is_hamming_distance(
            pairs in proptest::collection::vec((0u8..2, 0u8..2), 1..50)
        ) {
            let det: Vec<u8> = pairs.iter().map(|(a, _)| *a).collect();
            let sur: Vec<u8> = pairs.iter().map(|(_, b)| *b).collect();
            let c = conflicts(&det, &sur).unwrap();
            let hamming = det.iter().zip(&sur).filter(|(a, b)| a != b).count();
            prop_assert_eq!(c.anc.len() + c.nac.len(), hamming);
        }
    }

    #[test]
    fn discovery_rate_cases() {
        // two ANC conflicts, both gold-normal
        let c = ConflictSets {
            anc: vec![0, 2],
            nac: vec![],
        };
        let rates = discovery_rates(&c, &[0, 1, 0, 1]);
        assert_eq!(rates.tnd, Some(1.0));
        assert_eq!(rates.tad, None);

        // one of two ANC conflicts is really an anomaly
        let c = ConflictSets {
            anc: vec![0, 1],
            nac: vec![3],
        };
        let rates = discovery_rates(&c, &[0, 1, 0, 1]);
        assert_eq!(rates.tnd, Some(0.5));
        assert_eq!(rates.tad, Some(1.0));
    }

    #[test]
    fn bias_summary_arithmetic() {
        let records = [
            BiasRecord {
                train_estimate: 0.9,
                test_auc: 0.8,
                variant: BiasVariant::CvGrouped,
            },
            BiasRecord {
                train_estimate: 0.7,
                test_auc: 0.8,
                variant: BiasVariant::CvGrouped,
            },
            BiasRecord {
                train_estimate: 0.85,
                test_auc: 0.85,
                variant: BiasVariant::BbcGrouped,
            },
        ];
        let summary = bias_summary(&records);
        let cv = summary
            .iter()
            .find(|s| s.variant == BiasVariant::CvGrouped)
            .unwrap();
        assert_abs_diff_eq!(cv.rss, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(cv.mean_signed_bias, 0.0, epsilon = 1e-12);
        let bbc = summary
            .iter()
            .find(|s| s.variant == BiasVariant::BbcGrouped)
            .unwrap();
        assert_eq!(bbc.rss, 0.0);
    }
}
