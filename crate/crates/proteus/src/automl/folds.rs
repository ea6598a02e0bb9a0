//! Stratified, repeated, group-aware fold assignment.
//!
//! Groups are atomic: every row of a group lands in the same fold, which
//! is what prevents a pseudo-sample in a training fold from leaking
//! information about its parent anomaly in the test fold. Stratification
//! deals each class's groups round-robin after a seeded shuffle, so
//! per-fold class counts stay within one group of proportional.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ProteusError, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvProtocol {
    /// Folds per repeat (K).
    pub folds: usize,
    /// Independent repeats (R).
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CvProtocol {
    fn default() -> Self {
        CvProtocol {
            folds: 10,
            repeats: 5,
            seed: 0,
        }
    }
}

impl CvProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(ProteusError::InvalidParameter(
                "cross-validation needs K >= 2".into(),
            ));
        }
        if self.repeats < 1 {
            return Err(ProteusError::InvalidParameter(
                "cross-validation needs R >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Whether fold assignment respects groups or treats every row as its
/// own singleton (the leaky variant, kept for the bias experiments).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupingMode {
    Grouped,
    Ungrouped,
}

/// Assign each row to a fold, per repeat. A group's class is anomalous
/// if any member is. Requires at least K groups in each class so every
/// fold sees both classes.
pub fn make_folds(
    labels: &[u8],
    groups: &[usize],
    protocol: &CvProtocol,
) -> Result<Vec<Vec<usize>>> {
    protocol.validate()?;
    if labels.len() != groups.len() {
        return Err(ProteusError::InvalidData(
            "labels/groups length mismatch".into(),
        ));
    }

    // group keys in first-appearance order, with their class
    let mut group_order: Vec<usize> = Vec::new();
    let mut group_class: Vec<u8> = Vec::new();
    let mut seen: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for (row, &g) in groups.iter().enumerate() {
        match seen.get(&g) {
            Some(&pos) => {
                if labels[row] == 1 {
                    group_class[pos] = 1;
                }
            }
            None => {
                seen.insert(g, group_order.len());
                group_order.push(g);
                group_class.push(labels[row]);
            }
        }
    }

    let k = protocol.folds;
    for class in [1u8, 0u8] {
        let count = group_class.iter().filter(|&&c| c == class).count();
        if count < k {
            return Err(ProteusError::TooFewGroups {
                groups: count,
                folds: k,
            });
        }
    }

    let mut assignments = Vec::with_capacity(protocol.repeats);
    for repeat in 0..protocol.repeats {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(protocol.seed, &[5, repeat as u64]));
        let mut group_fold: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
        for class in [0u8, 1u8] {
            let mut class_groups: Vec<usize> = group_order
                .iter()
                .zip(&group_class)
                .filter(|(_, &c)| c == class)
                .map(|(&g, _)| g)
                .collect();
            class_groups.shuffle(&mut rng);
            for (pos, g) in class_groups.into_iter().enumerate() {
                group_fold.insert(g, pos % k);
            }
        }
        assignments.push(groups.iter().map(|g| group_fold[g]).collect());
    }
    Ok(assignments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_groups_stratify_exactly() {
        let mut labels = vec![0u8; 90];
        labels.extend(vec![1u8; 10]);
        let groups: Vec<usize> = (0..100).collect();
        let protocol = CvProtocol {
            folds: 10,
            repeats: 3,
            seed: 4,
        };
        let folds = make_folds(&labels, &groups, &protocol).unwrap();
        for assignment in &folds {
            for fold in 0..10 {
                let rows: Vec<usize> = (0..100).filter(|&i| assignment[i] == fold).collect();
                let pos = rows.iter().filter(|&&i| labels[i] == 1).count();
                assert_eq!(pos, 1, "fold {fold} has {pos} positives");
                assert_eq!(rows.len(), 10);
            }
        }
    }

    #[test]
    fn grouped_rows_share_a_fold_in_every_repeat() {
        // anomaly row 5 with three pseudo-rows appended sharing group 5
        let mut labels = vec![0u8; 30];
        labels[5] = 1;
        labels[17] = 1;
        labels[29] = 1;
        let mut groups: Vec<usize> = (0..30).collect();
        labels.extend([1, 1, 1]);
        groups.extend([5, 5, 5]);
        let protocol = CvProtocol {
            folds: 3,
            repeats: 5,
            seed: 8,
        };
        let folds = make_folds(&labels, &groups, &protocol).unwrap();
        for assignment in &folds {
            assert_eq!(assignment[30], assignment[5]);
            assert_eq!(assignment[31], assignment[5]);
            assert_eq!(assignment[32], assignment[5]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let labels: Vec<u8> = (0..60).map(|i| u8::from(i % 6 == 0)).collect();
        let groups: Vec<usize> = (0..60).collect();
        let protocol = CvProtocol {
            folds: 5,
            repeats: 4,
            seed: 21,
        };
        let a = make_folds(&labels, &groups, &protocol).unwrap();
        let b = make_folds(&labels, &groups, &protocol).unwrap();
        assert_eq!(a, b);
        // repeats differ from each other
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn too_few_anomaly_groups_is_an_instructive_error() {
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i < 3)).collect();
        let groups: Vec<usize> = (0..40).collect();
        let protocol = CvProtocol {
            folds: 10,
            repeats: 1,
            seed: 0,
        };
        let err = make_folds(&labels, &groups, &protocol).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("reduce K"), "{msg}");
    }

    #[test]
    fn class_proportions_within_one_group() {
        let labels: Vec<u8> = (0..83).map(|i| u8::from(i % 7 == 0)).collect();
        let groups: Vec<usize> = (0..83).collect();
        let protocol = CvProtocol {
            folds: 4,
            repeats: 2,
            seed: 13,
        };
        let folds = make_folds(&labels, &groups, &protocol).unwrap();
        for assignment in &folds {
            for class in [0u8, 1u8] {
                let counts: Vec<usize> = (0..4)
                    .map(|f| {
                        (0..83)
                            .filter(|&i| assignment[i] == f && labels[i] == class)
                            .count()
                    })
                    .collect();
                let max = counts.iter().max().unwrap();
                let min = counts.iter().min().unwrap();
                assert!(max - min <= 1, "class {class} counts {counts:?}");
            }
        }
    }
}
