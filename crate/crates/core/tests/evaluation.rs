mod common;

use std::collections::HashSet;

use common::{brute_average_precision, brute_prf};
use relind::eval::{evaluate, evaluate_detailed, DatasetOrigin, EvalConfig, RelationDataset};
use relind::synthetic::translation_fixture;
use relind::{ModelKind, WordEmbedding, WordPair};

#[test]
fn constant_scores_give_prevalence_baselines() {
    // every word shares one vector, so 3CosAvg scores all candidates alike
    let words: Vec<String> = (0..30).map(|i| format!("x{i}")).collect();
    let emb = WordEmbedding::from_entries(words.iter().map(|w| (w.clone(), vec![1.0, 2.0, -0.5])), false).unwrap();
    let pairs: Vec<WordPair> = (0..12).map(|i| WordPair::new(words[i].clone(), words[i + 12].clone())).collect();
    let rel = RelationDataset::new("flat", pairs, DatasetOrigin::CustomTsv).unwrap();
    let out = evaluate_detailed(&[rel], &emb, &EvalConfig::new(ModelKind::ThreeCosAvg, 5)).unwrap();

    let mut aps = Vec::new();
    for f in &out.folds {
        let first = f.test[0].0;
        assert!(f.test.iter().all(|s| s.0 == first));
        // every candidate is accepted, so precision is the positive share
        let positives = f.test.iter().filter(|s| s.1).count();
        assert_eq!(f.confusion.tp, positives);
        assert_eq!(f.confusion.fp, f.test.len() - positives);
        assert_eq!(f.average_precision, brute_average_precision(&f.test).unwrap());
        aps.push(f.average_precision);
    }
    let r = &out.report.relations[0];
    let prevalence = r.confusion.tp as f64 / (r.confusion.tp + r.confusion.fp) as f64;
    assert_eq!(r.precision, prevalence);
    assert_eq!(r.recall, 1.0);
    assert!((r.map - aps.iter().sum::<f64>() / aps.len() as f64).abs() < 1e-12);
}

#[test]
fn no_fold_leaks_test_pairs() {
    let fx = translation_fixture(4, 3, 14, 8);
    for model in [ModelKind::Translation, ModelKind::Regression, ModelKind::Margin] {
        let out = evaluate_detailed(&fx.relations, &fx.embedding, &EvalConfig::new(model, 1)).unwrap();
        for f in &out.folds {
            let fit: HashSet<&WordPair> = f.train_pairs.iter().chain(&f.validation_pairs).collect();
            for lp in f.test_pairs.iter().filter(|p| p.is_positive()) {
                assert!(!fit.contains(&lp.pair));
                assert!(!fit.contains(&lp.pair.swapped()));
            }
            let train: HashSet<&WordPair> = f.train_pairs.iter().collect();
            assert!(f.validation_pairs.iter().all(|p| !train.contains(p)));
        }
    }
}

#[test]
fn report_aggregates_match_fold_records() {
    let fx = translation_fixture(5, 4, 12, 2);
    let out = evaluate_detailed(&fx.relations, &fx.embedding, &EvalConfig::new(ModelKind::Translation, 9)).unwrap();
    let rep = &out.report;
    for (i, r) in rep.relations.iter().enumerate() {
        let folds: Vec<_> = out.folds.iter().filter(|f| f.relation == i).collect();
        assert_eq!(folds.len(), r.folds - r.skipped_folds);
        let mut all = Vec::new();
        for f in &folds {
            all.extend(f.test.iter().map(|&(s, p)| (if s >= f.threshold { 1.0 } else { 0.0 }, p)));
        }
        let (p, rc, f1) = brute_prf(&all, 0.5);
        assert_eq!((r.precision, r.recall), (p, rc));
        assert!((r.f1 - f1).abs() < 1e-15);
        assert!((r.f1 - 2.0 * p * rc / (p + rc)).abs() < 1e-12);
        let map = folds.iter().map(|f| f.average_precision).sum::<f64>() / folds.len() as f64;
        assert!((r.map - map).abs() < 1e-12);
    }
    let n = rep.relations.len() as f64;
    let mean = |g: fn(&relind::eval::RelationReport) -> f64| rep.relations.iter().map(g).sum::<f64>() / n;
    assert!((rep.macro_avg.map - mean(|r| r.map)).abs() < 1e-12);
    assert!((rep.macro_avg.f1 - mean(|r| r.f1)).abs() < 1e-12);
    assert!((rep.macro_avg.precision - mean(|r| r.precision)).abs() < 1e-12);

    let again = evaluate(&fx.relations, &fx.embedding, &EvalConfig::new(ModelKind::Translation, 9)).unwrap();
    assert_eq!(again.to_json().unwrap(), rep.to_json().unwrap());
}

#[test]
fn tiny_relations_are_skipped() {
    let fx = translation_fixture(3, 1, 5, 4);
    let mut rels = fx.relations.clone();
    let p = rels[0].pairs[0].clone();
    rels.push(RelationDataset::new("single", vec![p], DatasetOrigin::CustomTsv).unwrap());
    let rep = evaluate(&rels, &fx.embedding, &EvalConfig::new(ModelKind::LrCos, 1)).unwrap();
    assert_eq!(rep.relations.len(), 1);
    assert_eq!(rep.skipped_relations[0].name, "single");
}
