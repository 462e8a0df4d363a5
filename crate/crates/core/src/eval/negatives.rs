use std::collections::HashSet;

use rand::seq::index;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::WordPair;
use crate::rng::StreamRng;

const MAX_ATTEMPTS: usize = 100;
const RANDOM_TAILS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    TestPositive,
    Swapped,
    RandomTail,
    OtherRelation,
    RandomPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

/// A candidate pair with its label; the label follows from the provenance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub pair: WordPair,
    pub provenance: Provenance,
}

impl LabeledPair {
    pub fn positive(pair: WordPair) -> Self {
        LabeledPair {
            pair,
            provenance: Provenance::TestPositive,
        }
    }

    pub fn label(&self) -> Label {
        match self.provenance {
            Provenance::TestPositive => Label::Positive,
            _ => Label::Negative,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.label() == Label::Positive
    }
}

/// Negatives plus the number of candidates that had to be skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeSet {
    pub pairs: Vec<LabeledPair>,
    pub skipped: usize,
}

/// Draws negatives for every positive in `fold`, in fold order:
/// the reversed pair, up to two other targets from the fold, one pair of
/// another relation and one random pair over `vocabulary`.
///
/// `known` holds every positive pair of the relation; no negative is ever one
/// of them. Strategies that cannot find a valid candidate after bounded
/// retries are skipped and counted.
pub fn generate_negatives(
    fold: &[WordPair],
    known: &HashSet<WordPair>,
    other_relations: &[&[WordPair]],
    vocabulary: &[String],
    rng: &mut StreamRng,
) -> Result<NegativeSet> {
    if fold.is_empty() {
        return Err(Error::InsufficientData("cannot draw negatives for an empty fold".into()));
    }
    let others: Vec<&[WordPair]> = other_relations.iter().copied().filter(|r| !r.is_empty()).collect();
    if others.is_empty() {
        log::warn!("no other relations available; other-relation negatives skipped");
    }
    let mut pairs = Vec::with_capacity(5 * fold.len());
    let mut skipped = 0;
    for (i, p) in fold.iter().enumerate() {
        let swapped = p.swapped();
        if known.contains(&swapped) {
            skipped += 1;
        } else {
            pairs.push(LabeledPair {
                pair: swapped,
                provenance: Provenance::Swapped,
            });
        }

        let tails: Vec<&str> = fold
            .iter()
            .enumerate()
            .filter(|&(j, q)| j != i && q.target != p.target)
            .map(|(_, q)| q.target.as_str())
            .filter(|t| !known.contains(&WordPair::new(p.source.as_str(), *t)))
            .collect::<Vec<_>>();
        let mut tails_unique = Vec::with_capacity(tails.len());
        for t in tails {
            if !tails_unique.contains(&t) {
                tails_unique.push(t);
            }
        }
        let take = RANDOM_TAILS.min(tails_unique.len());
        for j in index::sample(rng, tails_unique.len(), take) {
            pairs.push(LabeledPair {
                pair: WordPair::new(p.source.as_str(), tails_unique[j]),
                provenance: Provenance::RandomTail,
            });
        }

        if !others.is_empty() {
            let found = (0..MAX_ATTEMPTS).find_map(|_| {
                let rel = others[rng.random_range(0..others.len())];
                let q = &rel[rng.random_range(0..rel.len())];
                (!known.contains(q)).then(|| q.clone())
            });
            match found {
                Some(q) => pairs.push(LabeledPair {
                    pair: q,
                    provenance: Provenance::OtherRelation,
                }),
                None => skipped += 1,
            }
        }

        let found = (vocabulary.len() >= 2)
            .then(|| {
                (0..MAX_ATTEMPTS).find_map(|_| {
                    let a = rng.random_range(0..vocabulary.len());
                    let b = rng.random_range(0..vocabulary.len());
                    let q = WordPair::new(vocabulary[a].as_str(), vocabulary[b].as_str());
                    (a != b && !known.contains(&q)).then_some(q)
                })
            })
            .flatten();
        match found {
            Some(q) => pairs.push(LabeledPair {
                pair: q,
                provenance: Provenance::RandomPair,
            }),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} negative candidate(s) after collisions");
    }
    Ok(NegativeSet { pairs, skipped })
}
