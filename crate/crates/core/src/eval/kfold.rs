use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::stream;

/// Class-stratified k-fold partition of `0..n`.
///
/// Each class is shuffled and dealt round-robin, with the second class
/// continuing where the first stopped, so fold sizes differ by at most one
/// overall and per class. Indices inside a fold are ascending.
pub fn kfold_split(n: usize, labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::invalid(format!("cannot split {n} samples into {k} folds")));
    }
    if labels.len() != n {
        return Err(Error::invalid("label count differs from sample count"));
    }
    let mut rng = stream(seed, 0);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if !members.is_empty() && members.len() < k {
            log::warn!(
                "class {} has {} members for {k} folds; some folds will lack it",
                if class { "positive" } else { "negative" },
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_ten() {
        let labels: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        let folds = kfold_split(10, &labels, 5, 3).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| labels[i]).count(), 1);
        }
    }

    #[test]
    fn sixty_forty_mix() {
        let labels: Vec<bool> = (0..100).map(|i| i < 60).collect();
        let folds = kfold_split(100, &labels, 5, 9).unwrap();
        for f in &folds {
            let pos = f.iter().filter(|&&i| labels[i]).count();
            assert!((11..=13).contains(&pos));
            assert_eq!(f.len(), 20);
        }
    }

    #[test]
    fn errors() {
        assert!(kfold_split(3, &[true; 3], 5, 0).is_err());
        assert!(kfold_split(10, &[true; 9], 5, 0).is_err());
    }

    proptest! {
        #[test]
        fn partition_properties(labels in proptest::collection::vec(any::<bool>(), 5..80), seed: u64, k in 2usize..6) {
            let n = labels.len();
            let folds = kfold_split(n, &labels, k, seed).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for class in [true, false] {
                let c: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
                prop_assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
            }
            prop_assert_eq!(folds.clone(), kfold_split(n, &labels, k, seed).unwrap());
        }
    }
}
