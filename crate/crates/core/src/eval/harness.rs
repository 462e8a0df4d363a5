use std::collections::{BTreeSet, HashSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::dataset::{DatasetOrigin, RelationDataset};
use super::folds::{validation_split, EvaluationPlan};
use super::metrics::{average_precision, rank_labels, select_threshold, Confusion};
use super::negatives::{generate_negatives, LabeledPair, Provenance};
use crate::baselines::{MarginConfig, C_GRID};
use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::jsonfmt::{self, FloatStyle};
use crate::models::{FitOptions, FittedModel, ModelKind};
use crate::pair::WordPair;
use crate::rng::StreamKey;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub model: ModelKind,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub k_override: Option<usize>,
    pub margin: MarginConfig,
    /// Choose the margin classifier's `C` from the grid on validation data.
    pub tune_margin_c: bool,
    /// Echoed into the report.
    pub embedding_id: String,
    pub dataset_id: String,
}

impl EvalConfig {
    pub fn new(model: ModelKind, seed: u64) -> Self {
        EvalConfig {
            model,
            seed,
            workers: None,
            k_override: None,
            margin: MarginConfig::default(),
            tune_margin_c: true,
            embedding_id: String::new(),
            dataset_id: String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ProvenanceCounts {
    pub test_positive: usize,
    pub swapped: usize,
    pub random_tail: usize,
    pub other_relation: usize,
    pub random_pair: usize,
}

impl ProvenanceCounts {
    fn record(&mut self, p: Provenance) {
        match p {
            Provenance::TestPositive => self.test_positive += 1,
            Provenance::Swapped => self.swapped += 1,
            Provenance::RandomTail => self.random_tail += 1,
            Provenance::OtherRelation => self.other_relation += 1,
            Provenance::RandomPair => self.random_pair += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub embedding: String,
    pub dataset: String,
    pub model: ModelKind,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_override: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub name: String,
    pub origin: DatasetOrigin,
    pub pairs: usize,
    pub oov_dropped: usize,
    pub duplicates_removed: usize,
    pub folds: usize,
    pub skipped_folds: usize,
    /// Folds fitted with the translation model because the training set was
    /// too small for regression.
    pub model_fallback_folds: usize,
    /// Folds whose threshold came from training scores instead of validation.
    pub threshold_fallback_folds: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Average precision averaged over folds.
    pub map: f64,
    /// Average precision of all folds' candidates ranked together.
    pub pooled_ap: f64,
    /// Mean of the per-fold thresholds.
    pub threshold: f64,
    pub confusion: Confusion,
    pub counts: ProvenanceCounts,
    pub negatives_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedRelation {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacroAverages {
    pub relations: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map: f64,
    pub pooled_ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub config: ConfigEcho,
    pub relations: Vec<RelationReport>,
    pub skipped_relations: Vec<SkippedRelation>,
    pub macro_avg: MacroAverages,
}

impl EvaluationReport {
    /// JSON with six decimals per number.
    pub fn to_json(&self) -> Result<String> {
        Ok(jsonfmt::to_string(self, FloatStyle::Fixed6)?)
    }

    /// Same bytes as [`EvaluationReport::to_json`].
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    /// One row per relation followed by a `MACRO` row.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let f = |x: f64| jsonfmt::format_f64(x, FloatStyle::Fixed6);
        writeln!(w, "relation\torigin\tpairs\tprecision\trecall\tf1\tmap\tpooled_ap\tthreshold")?;
        for r in &self.relations {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.name,
                r.origin,
                r.pairs,
                f(r.precision),
                f(r.recall),
                f(r.f1),
                f(r.map),
                f(r.pooled_ap),
                f(r.threshold)
            )?;
        }
        let m = &self.macro_avg;
        writeln!(
            w,
            "MACRO\t-\t{}\t{}\t{}\t{}\t{}\t{}\t-",
            m.relations,
            f(m.precision),
            f(m.recall),
            f(m.f1),
            f(m.map),
            f(m.pooled_ap)
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdSource {
    Validation,
    Fallback,
}

/// Everything computed for one (relation, fold) task.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldRecord {
    pub relation: usize,
    pub fold: usize,
    /// Model actually fitted for this fold.
    pub model: ModelKind,
    pub margin_c: Option<f64>,
    pub threshold: f64,
    pub threshold_source: ThresholdSource,
    /// `(score, is_positive)` for the validation candidates, if any.
    pub validation: Vec<(f64, bool)>,
    /// Test candidates in ranking-insertion order.
    pub test: Vec<(f64, bool)>,
    pub test_pairs: Vec<LabeledPair>,
    pub confusion: Confusion,
    pub average_precision: f64,
    pub negatives_skipped: usize,
    pub train_pairs: Vec<WordPair>,
    pub validation_pairs: Vec<WordPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvaluationReport,
    /// Completed folds in relation then fold order.
    pub folds: Vec<FoldRecord>,
}

/// Runs cross-validation for `config.model` over every relation and returns
/// the report.
pub fn evaluate(relations: &[RelationDataset], emb: &WordEmbedding, config: &EvalConfig) -> Result<EvaluationReport> {
    evaluate_detailed(relations, emb, config).map(|e| e.report)
}

struct Prepared {
    relations: Vec<UsableRelation>,
    skipped: Vec<SkippedRelation>,
    vocabulary: Vec<String>,
}

struct UsableRelation {
    source: usize,
    name: String,
    pairs: Vec<WordPair>,
    known: HashSet<WordPair>,
    oov_dropped: usize,
    plan: EvaluationPlan,
}

fn prepare(relations: &[RelationDataset], emb: &WordEmbedding, root: StreamKey) -> Result<Prepared> {
    let mut usable = Vec::new();
    let mut skipped = Vec::new();
    for (idx, rel) in relations.iter().enumerate() {
        let pairs: Vec<WordPair> = rel
            .pairs
            .iter()
            .filter(|p| emb.contains(&p.source) && emb.contains(&p.target))
            .cloned()
            .collect();
        let oov_dropped = rel.pairs.len() - pairs.len();
        if oov_dropped > 0 {
            log::info!("relation `{}`: dropped {oov_dropped} pair(s) with out-of-vocabulary words", rel.name);
        }
        if pairs.len() < 2 {
            log::warn!("relation `{}` has {} usable pair(s); skipped", rel.name, pairs.len());
            skipped.push(SkippedRelation {
                name: rel.name.clone(),
                reason: format!("{} usable pair(s) after dropping {oov_dropped} out-of-vocabulary", pairs.len()),
            });
            continue;
        }
        let plan = EvaluationPlan::new(pairs.len(), root.child("folds").child(&rel.name).index(idx as u64))?;
        usable.push(UsableRelation {
            source: idx,
            name: rel.name.clone(),
            known: pairs.iter().cloned().collect(),
            pairs,
            oov_dropped,
            plan,
        });
    }
    let vocabulary: BTreeSet<String> = usable
        .iter()
        .flat_map(|r| r.pairs.iter().flat_map(|p| [p.source.clone(), p.target.clone()]))
        .collect();
    Ok(Prepared {
        relations: usable,
        skipped,
        vocabulary: vocabulary.into_iter().collect(),
    })
}

struct FoldContext<'a> {
    emb: &'a WordEmbedding,
    config: &'a EvalConfig,
    prepared: &'a Prepared,
    root: StreamKey,
}

fn score_all(model: &FittedModel, emb: &WordEmbedding, pairs: &[LabeledPair]) -> Result<Vec<(f64, bool)>> {
    pairs
        .iter()
        .map(|lp| {
            let v = emb.lookup_all([lp.pair.source.as_str(), lp.pair.target.as_str()])?;
            Ok((model.ranking_score(emb, v[0], v[1])?, lp.is_positive()))
        })
        .collect()
}

fn fit_options(config: &EvalConfig, seed: u64, c: f64) -> FitOptions {
    FitOptions {
        seed,
        k_override: config.k_override,
        margin: MarginConfig { c, ..config.margin },
    }
}

impl FoldContext<'_> {
    fn negatives(&self, rel: usize, positives: &[WordPair], key: StreamKey) -> Result<(Vec<LabeledPair>, usize)> {
        let others: Vec<&[WordPair]> = self
            .prepared
            .relations
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != rel)
            .map(|(_, r)| r.pairs.as_slice())
            .collect();
        let set = generate_negatives(
            positives,
            &self.prepared.relations[rel].known,
            &others,
            &self.prepared.vocabulary,
            &mut key.rng(),
        )?;
        let mut all: Vec<LabeledPair> = positives.iter().cloned().map(LabeledPair::positive).collect();
        all.extend(set.pairs);
        Ok((all, set.skipped))
    }

    fn run(&self, rel: usize, fold: usize) -> Result<Option<FoldRecord>> {
        let r = &self.prepared.relations[rel];
        let key = self.root.child("fold").child(self.relation_name(rel)).index(r.source as u64).index(fold as u64);
        let split = r.plan.split(fold, &r.pairs);
        let mut kind = self.config.model;
        if kind == ModelKind::Regression && split.train.len() < kind.min_pairs() {
            kind = ModelKind::Translation;
        }
        if split.train.len() < kind.min_pairs() {
            log::warn!(
                "relation `{}` fold {fold}: {} training pair(s), too few for {kind}; fold skipped",
                self.relation_name(rel),
                split.train.len()
            );
            return Ok(None);
        }
        let pick = |idx: &[usize]| -> Vec<WordPair> { idx.iter().map(|&i| r.pairs[i].clone()).collect() };
        let fit_seed = key.child("fit").value();

        let (fit_idx, val_idx) = match validation_split(&split.train, kind.min_pairs(), key.child("validation")) {
            Some((f, v)) => (f, Some(v)),
            None => (split.train.clone(), None),
        };
        let fit_pairs = pick(&fit_idx);

        let mut validation_scored = Vec::new();
        let mut validation_pairs = Vec::new();
        let mut chosen: Option<(FittedModel, f64, Option<f64>)> = None;
        if let Some(v) = &val_idx {
            validation_pairs = pick(v);
            let (cands, _) = self.negatives(rel, &validation_pairs, key.child("validation-negatives"))?;
            let grid: Vec<f64> = if kind == ModelKind::Margin && self.config.tune_margin_c {
                C_GRID.to_vec()
            } else {
                vec![self.config.margin.c]
            };
            let mut best_f1 = f64::NEG_INFINITY;
            for c in grid {
                let model = FittedModel::fit(kind, self.emb, &fit_pairs, &fit_options(self.config, fit_seed, c))?;
                let scored = score_all(&model, self.emb, &cands)?;
                let Ok(choice) = select_threshold(&scored) else {
                    break;
                };
                if choice.f1 > best_f1 {
                    best_f1 = choice.f1;
                    let margin_c = (kind == ModelKind::Margin).then_some(c);
                    chosen = Some((model, choice.threshold, margin_c));
                    validation_scored = scored;
                }
            }
        }

        let (model, threshold, margin_c, source) = match chosen {
            Some((m, t, c)) => (m, t, c, ThresholdSource::Validation),
            None => {
                validation_scored.clear();
                let c = self.config.margin.c;
                let model = FittedModel::fit(kind, self.emb, &fit_pairs, &fit_options(self.config, fit_seed, c))?;
                let (cands, _) = self.negatives(rel, &fit_pairs, key.child("fallback-negatives"))?;
                let scored = score_all(&model, self.emb, &cands)?;
                let mean = |pos: bool| {
                    let xs: Vec<f64> = scored.iter().filter(|s| s.1 == pos).map(|s| s.0).collect();
                    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
                };
                let pos = mean(true).expect("fit set is nonempty");
                let threshold = match mean(false) {
                    Some(neg) => 0.5 * (pos + neg),
                    None => pos,
                };
                let margin_c = (kind == ModelKind::Margin).then_some(c);
                (model, threshold, margin_c, ThresholdSource::Fallback)
            }
        };

        let test_positives = pick(&split.test);
        let (mut cands, negatives_skipped) = self.negatives(rel, &test_positives, key.child("test-negatives"))?;
        cands.shuffle(&mut key.child("order").rng());
        let scored = score_all(&model, self.emb, &cands)?;
        let confusion = Confusion::at_threshold(&scored, threshold);
        let ap = average_precision(&rank_labels(&scored))?;
        Ok(Some(FoldRecord {
            relation: r.source,
            fold,
            model: kind,
            margin_c,
            threshold,
            threshold_source: source,
            validation: validation_scored,
            test: scored,
            test_pairs: cands,
            confusion,
            average_precision: ap,
            negatives_skipped,
            train_pairs: fit_pairs,
            validation_pairs,
        }))
    }

    fn relation_name(&self, rel: usize) -> &str {
        &self.prepared.relations[rel].name
    }
}

pub fn evaluate_detailed(relations: &[RelationDataset], emb: &WordEmbedding, config: &EvalConfig) -> Result<Evaluation> {
    if config.workers == Some(0) {
        return Err(Error::InvalidArgument("worker count must be positive".into()));
    }
    let root = StreamKey::new(config.seed);
    let prepared = prepare(relations, emb, root)?;
    let tasks: Vec<(usize, usize)> = prepared
        .relations
        .iter()
        .enumerate()
        .flat_map(|(i, r)| (0..r.plan.len()).map(move |f| (i, f)))
        .collect();
    let ctx = FoldContext {
        emb,
        config,
        prepared: &prepared,
        root,
    };
    let run_all = || -> Vec<Result<Option<FoldRecord>>> { tasks.par_iter().map(|&(r, f)| ctx.run(r, f)).collect() };
    let results = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {n} workers: {e}")))?
            .install(run_all),
        None => run_all(),
    };
    let records: Vec<Option<FoldRecord>> = results.into_iter().collect::<Result<_>>()?;

    let mut reports = Vec::new();
    let mut skipped = prepared.skipped.clone();
    let mut done = Vec::new();
    let mut cursor = 0;
    for r in &prepared.relations {
        let rel = &relations[r.source];
        let slice = &records[cursor..cursor + r.plan.len()];
        cursor += r.plan.len();
        let folds: Vec<&FoldRecord> = slice.iter().flatten().collect();
        if folds.is_empty() {
            skipped.push(SkippedRelation {
                name: rel.name.clone(),
                reason: format!("no fold could be fitted as {}", config.model),
            });
            continue;
        }
        let mut confusion = Confusion::default();
        let mut counts = ProvenanceCounts::default();
        let mut pooled = Vec::new();
        for f in &folds {
            confusion.add(f.confusion);
            for lp in &f.test_pairs {
                counts.record(lp.provenance);
            }
            pooled.extend_from_slice(&f.test);
        }
        let nf = folds.len() as f64;
        reports.push(RelationReport {
            name: rel.name.clone(),
            origin: rel.origin,
            pairs: r.pairs.len(),
            oov_dropped: r.oov_dropped,
            duplicates_removed: rel.duplicates_removed,
            folds: r.plan.len(),
            skipped_folds: r.plan.len() - folds.len(),
            model_fallback_folds: folds.iter().filter(|f| f.model != config.model).count(),
            threshold_fallback_folds: folds
                .iter()
                .filter(|f| f.threshold_source == ThresholdSource::Fallback)
                .count(),
            precision: confusion.precision(),
            recall: confusion.recall(),
            f1: confusion.f1(),
            map: folds.iter().map(|f| f.average_precision).sum::<f64>() / nf,
            pooled_ap: average_precision(&rank_labels(&pooled))?,
            threshold: folds.iter().map(|f| f.threshold).sum::<f64>() / nf,
            confusion,
            counts,
            negatives_skipped: folds.iter().map(|f| f.negatives_skipped).sum(),
        });
        done.extend(folds.into_iter().cloned());
    }
    if reports.is_empty() {
        return Err(Error::InsufficientData("no relation could be evaluated".into()));
    }
    let n = reports.len() as f64;
    let avg = |g: fn(&RelationReport) -> f64| reports.iter().map(g).sum::<f64>() / n;
    let macro_avg = MacroAverages {
        relations: reports.len(),
        precision: avg(|r| r.precision),
        recall: avg(|r| r.recall),
        f1: avg(|r| r.f1),
        map: avg(|r| r.map),
        pooled_ap: avg(|r| r.pooled_ap),
    };
    Ok(Evaluation {
        report: EvaluationReport {
            config: ConfigEcho {
                embedding: config.embedding_id.clone(),
                dataset: config.dataset_id.clone(),
                model: config.model,
                seed: config.seed,
                k_override: config.k_override,
            },
            relations: reports,
            skipped_relations: skipped,
            macro_avg,
        },
        folds: done,
    })
}
