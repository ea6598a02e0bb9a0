use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ProteusError, Result};
use crate::seed::derive_seed;

/// Class-stratified train/test split. Per-class training counts are
/// `round(train_fraction * class_size)`, so each class lands within one
/// sample of its proportional share. Index lists come back sorted and
/// are disjoint and exhaustive; the partition is a pure function of the
/// seed.
pub fn stratified_split(
    labels: &[u8],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ProteusError::InvalidParameter(format!(
            "train_fraction must be in (0,1), got {train_fraction}"
        )));
    }
    let classes = [0u8, 1u8];
    for c in classes {
        if !labels.contains(&c) {
            return Err(ProteusError::InvalidData(format!(
                "class {c} has no samples"
            )));
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in classes {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c)
            .map(|(i, _)| i)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[u64::from(c)]));
        idx.shuffle(&mut rng);
        let n_train = (train_fraction * idx.len() as f64).round() as usize;
        let n_train = n_train.min(idx.len());
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_per_class_counts() {
        let mut labels = vec![0u8; 90];
        labels.extend(vec![1u8; 10]);
        let (train, test) = stratified_split(&labels, 0.7, 11).unwrap();
        let train_pos = train.iter().filter(|&&i| labels[i] == 1).count();
        let train_neg = train.len() - train_pos;
        assert_eq!(train_pos, 7);
        assert_eq!(train_neg, 63);
        assert_eq!(train.len() + test.len(), 100);
    }

    #[test]
    fn tiny_balanced_split() {
        let labels = vec![0, 1, 0, 1];
        let (train, test) = stratified_split(&labels, 0.5, 3).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.len(), 2);
        let pos = |v: &[usize]| v.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(pos(&train), 1);
        assert_eq!(pos(&test), 1);
    }

    #[test]
    fn deterministic_and_exhaustive() {
        let labels: Vec<u8> = (0..57).map(|i| u8::from(i % 9 == 0)).collect();
        let a = stratified_split(&labels, 0.7, 42).unwrap();
        let b = stratified_split(&labels, 0.7, 42).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.0.iter().chain(a.1.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..57).collect::<Vec<_>>());
    }

    #[test]
    fn empty_class_is_an_error() {
        let labels = vec![0u8; 10];
        assert!(stratified_split(&labels, 0.5, 1).is_err());
    }
}
