use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// Confusion counts with the convention that a pair is accepted when its
/// score is at least the threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn at_threshold(scored: &[(f64, bool)], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for &(s, pos) in scored {
            match (s >= threshold, pos) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn add(&mut self, other: Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    /// 0 when nothing is accepted.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1_score(self.precision(), self.recall())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Labels in descending score order; equal scores keep their input order.
pub fn rank_labels(scored: &[(f64, bool)]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].0.partial_cmp(&scored[a].0).unwrap_or(Ordering::Equal));
    order.into_iter().map(|i| scored[i].1).collect()
}

/// Mean over positive ranks `r` of the fraction of positives among the top `r`.
pub fn average_precision(ranked: &[bool]) -> Result<f64> {
    let mut hits = 0usize;
    let mut total = 0.0;
    for (i, &pos) in ranked.iter().enumerate() {
        if pos {
            hits += 1;
            total += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(Error::InsufficientData("average precision needs at least one positive".into()));
    }
    Ok(total / hits as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub f1: f64,
}

fn nudge(x: f64, up: bool) -> f64 {
    let step = if x == 0.0 { f64::MIN_POSITIVE } else { 1e-9 * x.abs() };
    if up {
        x + step
    } else {
        x - step
    }
}

/// Picks the acceptance cut with the highest F1.
///
/// Candidate cuts lie between consecutive distinct scores plus one above the
/// maximum and one below the minimum. Ties go to the lowest threshold. An
/// interior cut returns the midpoint of its neighbours; an extreme cut
/// returns the extreme score moved outward by `1e-9 * |score|`.
pub fn select_threshold(scored: &[(f64, bool)]) -> Result<ThresholdChoice> {
    let positives = scored.iter().filter(|s| s.1).count();
    if positives == 0 || positives == scored.len() {
        return Err(Error::InsufficientData(
            "threshold selection needs both positive and negative examples".into(),
        ));
    }
    if scored.iter().any(|s| !s.0.is_finite()) {
        return Err(Error::Numerical("non-finite score in threshold selection".into()));
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Cut 0 accepts nothing.
    let mut best = ThresholdChoice {
        threshold: nudge(sorted[0].0, true),
        f1: 0.0,
    };
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == s {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let f1 = f1_score(ratio(tp, tp + fp), ratio(tp, positives));
        if f1 >= best.f1 {
            let threshold = match sorted.get(i) {
                None => nudge(s, false),
                Some(&(next, _)) => {
                    let mid = 0.5 * (s + next);
                    if mid > next && mid <= s {
                        mid
                    } else {
                        s
                    }
                }
            };
            best = ThresholdChoice { threshold, f1 };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ap_examples() {
        assert!((average_precision(&[true, false, true]).unwrap() - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(average_precision(&[true, true, false, false]).unwrap(), 1.0);
        assert!((average_precision(&[false, false, false, false, true]).unwrap() - 0.2).abs() < 1e-15);
        assert!(average_precision(&[false, false]).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = select_threshold(&[(3.0, true), (2.0, true), (1.0, false)]).unwrap();
        assert_eq!(t.threshold, 1.5);
        assert_eq!(t.f1, 1.0);

        let t = select_threshold(&[(1.0, true), (2.0, false)]).unwrap();
        assert!(t.threshold < 1.0);
        assert_eq!(Confusion::at_threshold(&[(1.0, true), (2.0, false)], t.threshold).tp, 1);

        assert!(select_threshold(&[(1.0, true)]).is_err());
        assert!(select_threshold(&[(1.0, false), (0.0, false)]).is_err());
    }

    #[test]
    fn equal_scores_take_lowest_threshold() {
        let scored = [(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        let t = select_threshold(&scored).unwrap();
        assert!(t.threshold < 0.5);
        assert_eq!(Confusion::at_threshold(&scored, t.threshold).tp, 2);
    }

    #[test]
    fn zero_score_extreme() {
        let t = select_threshold(&[(0.0, true), (1.0, true), (2.0, false), (3.0, false)]).unwrap();
        assert!(t.threshold < 0.0);
    }

    #[test]
    fn stable_ranking() {
        let ranked = rank_labels(&[(1.0, false), (2.0, true), (1.0, true)]);
        assert_eq!(ranked, vec![true, false, true]);
    }

    #[test]
    fn confusion_metrics() {
        let c = Confusion {
            tp: 3,
            fp: 1,
            fn_: 2,
            tn: 4,
        };
        assert_eq!(c.precision(), 0.75);
        assert_eq!(c.recall(), 0.6);
        assert!((c.f1() - 2.0 * 0.75 * 0.6 / 1.35).abs() < 1e-15);
        assert_eq!(Confusion::default().f1(), 0.0);
    }
}
