#![allow(dead_code)]

pub mod quad;

use relind::eval::Confusion;

/// Confusion counts by direct enumeration.
pub fn brute_confusion(scored: &[(f64, bool)], threshold: f64) -> Confusion {
    let tp = scored.iter().filter(|s| s.1 && s.0 >= threshold).count();
    let fp = scored.iter().filter(|s| !s.1 && s.0 >= threshold).count();
    let fn_ = scored.iter().filter(|s| s.1 && s.0 < threshold).count();
    let tn = scored.len() - tp - fp - fn_;
    Confusion { tp, fp, fn_, tn }
}

/// Precision, recall and F1 straight from the definitions.
pub fn brute_prf(scored: &[(f64, bool)], threshold: f64) -> (f64, f64, f64) {
    let c = brute_confusion(scored, threshold);
    let p = if c.tp + c.fp == 0 { 0.0 } else { c.tp as f64 / (c.tp + c.fp) as f64 };
    let r = if c.tp + c.fn_ == 0 { 0.0 } else { c.tp as f64 / (c.tp + c.fn_) as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Average precision where each item's rank is found by counting the items
/// placed before it (higher score, or equal score and earlier index).
pub fn brute_average_precision(scored: &[(f64, bool)]) -> Option<f64> {
    let rank = |i: usize| {
        1 + scored
            .iter()
            .enumerate()
            .filter(|&(j, s)| s.0 > scored[i].0 || (s.0 == scored[i].0 && j < i))
            .count()
    };
    let mut ranks: Vec<usize> = (0..scored.len()).filter(|&i| scored[i].1).map(rank).collect();
    if ranks.is_empty() {
        return None;
    }
    ranks.sort_unstable();
    let mut total = 0.0;
    for (k, &r) in ranks.iter().enumerate() {
        total += (k + 1) as f64 / r as f64;
    }
    Some(total / ranks.len() as f64)
}

/// Highest F1 over every acceptance set of the form "score >= some observed
/// score", plus the empty set.
pub fn best_possible_f1(scored: &[(f64, bool)]) -> f64 {
    scored
        .iter()
        .map(|s| brute_prf(scored, s.0).2)
        .fold(0.0, f64::max)
}
