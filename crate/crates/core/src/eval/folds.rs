use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::pair::WordPair;
use crate::rng::StreamKey;

pub const VALIDATION_FRACTION: f64 = 0.10;

/// Cross-validation layout for one relation: 10 folds once there are at least
/// ten pairs, leave-one-out below that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationPlan {
    /// Pair indices of each test fold, ascending.
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Indices used by one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub test: Vec<usize>,
    /// Everything outside the test fold except reversed copies of test pairs.
    pub train: Vec<usize>,
}

impl EvaluationPlan {
    pub fn new(n: usize, key: StreamKey) -> Result<Self> {
        if n == 0 {
            return Err(Error::InsufficientData("cannot build folds over zero pairs".into()));
        }
        let k = if n >= 10 { 10 } else { n };
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut key.rng());
        let mut folds = vec![Vec::with_capacity(n / k + 1); k];
        for (pos, idx) in order.into_iter().enumerate() {
            folds[pos % k].push(idx);
        }
        for f in &mut folds {
            f.sort_unstable();
        }
        Ok(EvaluationPlan {
            folds,
            seed: key.value(),
        })
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn split(&self, fold: usize, pairs: &[WordPair]) -> FoldSplit {
        let test = self.folds[fold].clone();
        let held: HashSet<&WordPair> = test.iter().map(|&i| &pairs[i]).collect();
        let in_test: HashSet<usize> = test.iter().copied().collect();
        let train = (0..pairs.len())
            .filter(|i| !in_test.contains(i))
            .filter(|&i| !held.contains(&pairs[i].swapped()))
            .collect();
        FoldSplit { test, train }
    }
}

/// Number of validation positives drawn from `train` training pairs.
pub fn validation_size(train: usize) -> usize {
    (VALIDATION_FRACTION * train as f64).ceil() as usize
}

/// Splits training indices into (fit, validation). Returns `None` when
/// taking the validation share would leave fewer than `min_fit` pairs.
pub fn validation_split(train: &[usize], min_fit: usize, key: StreamKey) -> Option<(Vec<usize>, Vec<usize>)> {
    let nv = validation_size(train.len());
    if nv == 0 || train.len() < nv + min_fit {
        return None;
    }
    let mut shuffled = train.to_vec();
    shuffled.shuffle(&mut key.rng());
    let mut validation = shuffled.split_off(train.len() - nv);
    shuffled.sort_unstable();
    validation.sort_unstable();
    Some((shuffled, validation))
}
