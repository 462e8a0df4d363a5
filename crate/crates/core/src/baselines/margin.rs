use std::collections::HashSet;

use rand::RngExt;

use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::pair::WordPair;
use crate::rng;

/// Values of `C` tried per relation.
pub const C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

const RANDOM_PAIR_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassWeights {
    pub positive: f64,
    pub negative: f64,
}

impl ClassWeights {
    pub fn balanced(n_pos: usize, n_neg: usize) -> Self {
        ClassWeights {
            positive: 1.0,
            negative: n_pos as f64 / n_neg as f64,
        }
    }

    pub fn symmetric() -> Self {
        ClassWeights {
            positive: 1.0,
            negative: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginConfig {
    pub c: f64,
    pub epochs: usize,
}

impl Default for MarginConfig {
    fn default() -> Self {
        MarginConfig { c: 1.0, epochs: 200 }
    }
}

/// Linear decision function `w . x + b` over difference vectors `p_t - p_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginClassifier {
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) c: f64,
    pub(crate) class_weights: ClassWeights,
}

impl MarginClassifier {
    pub(crate) fn from_parts(weights: Vec<f64>, bias: f64, c: f64, class_weights: ClassWeights) -> Self {
        MarginClassifier {
            weights,
            bias,
            c,
            class_weights,
        }
    }

    /// Assembles training differences for `pairs` and trains with `config`.
    pub fn fit_pairs(emb: &WordEmbedding, pairs: &[WordPair], seed: u64, config: &MarginConfig) -> Result<Self> {
        let set = assemble_margin_training(pairs, emb, seed)?;
        set.train(config)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn class_weights(&self) -> ClassWeights {
        self.class_weights
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn score(&self, emb: &WordEmbedding, source: &str, target: &str) -> Result<f64> {
        let v = emb.lookup_all([source, target])?;
        Ok(self.score_vectors(v[0], v[1]))
    }

    pub fn score_vectors(&self, ps: &[f64], pt: &[f64]) -> f64 {
        let diff: Vec<f64> = pt.iter().zip(ps).map(|(t, s)| t - s).collect();
        self.decision(&diff)
    }
}

/// Minimizes `(1 / 2C) |w|^2 + (1/N) sum_i c_i hinge(y_i (w . x_i + b))` by
/// full-batch subgradient descent with step `C / t`.
///
/// The bias is learned as the weight of a constant feature, so it is
/// regularized together with `w`.
pub fn train_margin_classifier(
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    c: f64,
    class_weights: ClassWeights,
    epochs: usize,
) -> Result<MarginClassifier> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::InsufficientData(format!(
            "margin classifier needs both classes ({} positives, {} negatives)",
            positives.len(),
            negatives.len()
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
    }
    let m = positives[0].len();
    if positives.iter().chain(negatives).any(|x| x.len() != m) {
        return Err(Error::InvalidArgument("training vectors differ in length".into()));
    }
    let examples: Vec<(&[f64], f64, f64)> = positives
        .iter()
        .map(|x| (x.as_slice(), 1.0, class_weights.positive))
        .chain(negatives.iter().map(|x| (x.as_slice(), -1.0, class_weights.negative)))
        .collect();
    let n = examples.len() as f64;
    let lambda = 1.0 / c;

    // augmented weights: w[0..m] then the bias
    let mut w = vec![0.0; m + 1];
    let mut grad = vec![0.0; m + 1];
    for t in 1..=epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for &(x, y, weight) in &examples {
            let margin = y * (x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[m]);
            if margin < 1.0 {
                let coef = weight * y;
                for (g, v) in grad.iter_mut().zip(x) {
                    *g -= coef * v;
                }
                grad[m] -= coef;
            }
        }
        let eta = 1.0 / (lambda * t as f64);
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= eta * (lambda * *wi + gi / n);
        }
    }
    let bias = w.pop().expect("augmented weight vector");
    Ok(MarginClassifier {
        weights: w,
        bias,
        c,
        class_weights,
    })
}

/// Positive and negative difference vectors for one relation.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginTrainingSet {
    pub positives: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<f64>>,
    pub swapped: usize,
    pub shuffled: usize,
    pub random: usize,
    pub warnings: Vec<String>,
}

impl MarginTrainingSet {
    pub fn class_weights(&self) -> ClassWeights {
        ClassWeights::balanced(self.positives.len(), self.negatives.len())
    }

    pub fn train(&self, config: &MarginConfig) -> Result<MarginClassifier> {
        train_margin_classifier(&self.positives, &self.negatives, config.c, self.class_weights(), config.epochs)
    }
}

/// Positives are `p_{t_i} - p_{s_i}`. Negatives are the swapped pairs, one
/// `(s_i, t_j)` per pair with a target from another training pair (skipped
/// when every such combination is itself a training pair), and `n` random
/// vocabulary pairs.
pub fn assemble_margin_training(pairs: &[WordPair], emb: &WordEmbedding, seed: u64) -> Result<MarginTrainingSet> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "margin classifier needs at least 2 training pairs, got {n}"
        )));
    }
    if emb.len() < 2 {
        return Err(Error::InsufficientData("vocabulary too small for random negative pairs".into()));
    }
    let known: HashSet<(String, String)> = pairs
        .iter()
        .map(|p| (emb.normalize(&p.source), emb.normalize(&p.target)))
        .collect();
    let words = pairs.iter().flat_map(|p| [p.source.as_str(), p.target.as_str()]);
    let vectors = emb.lookup_all(words)?;
    let diff = |s: &[f64], t: &[f64]| -> Vec<f64> { t.iter().zip(s).map(|(a, b)| a - b).collect() };

    let mut rng = rng::seeded(seed);
    let mut positives = Vec::with_capacity(n);
    let mut negatives = Vec::with_capacity(3 * n);
    let mut warnings = Vec::new();
    for i in 0..n {
        positives.push(diff(vectors[2 * i], vectors[2 * i + 1]));
    }
    for i in 0..n {
        negatives.push(diff(vectors[2 * i + 1], vectors[2 * i]));
    }
    let swapped = n;

    let mut shuffled = 0;
    for i in 0..n {
        let s = emb.normalize(&pairs[i].source);
        let candidates: Vec<usize> = (0..n)
            .filter(|&j| j != i && !known.contains(&(s.clone(), emb.normalize(&pairs[j].target))))
            .collect();
        if candidates.is_empty() {
            warnings.push(format!("no shuffled-target negative available for {}", pairs[i]));
            continue;
        }
        let j = candidates[rng.random_range(0..candidates.len())];
        negatives.push(diff(vectors[2 * i], vectors[2 * j + 1]));
        shuffled += 1;
    }

    let mut random = 0;
    for _ in 0..n {
        let mut found = None;
        for _ in 0..RANDOM_PAIR_ATTEMPTS {
            let a = rng.random_range(0..emb.len());
            let b = rng.random_range(0..emb.len());
            if a != b && !known.contains(&(emb.word(a).to_string(), emb.word(b).to_string())) {
                found = Some((a, b));
                break;
            }
        }
        match found {
            Some((a, b)) => {
                negatives.push(diff(emb.vector(a), emb.vector(b)));
                random += 1;
            }
            None => warnings.push("could not draw a random negative pair".into()),
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(MarginTrainingSet {
        positives,
        negatives,
        swapped,
        shuffled,
        random,
        warnings,
    })
}
