use std::collections::BTreeMap;

use logicprobe::nlg::Renderer;
use logicprobe::pipeline::dataset::Sizes;
use logicprobe::pipeline::{build_dataset, build_eval_set, DatasetConfig, EvalKind, Instance};
use logicprobe::scorer::{score, weighted_f1, Prediction, ScoreConfig, ScoreError};
use logicprobe::Label;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use Label::{False as F, True as T, Unknown as U};

/// Straight from the definition: support-weighted mean of per-class F1,
/// with precision and recall counted by brute force over the pairs.
fn reference_weighted_f1(golds: &[Label], preds: &[Label]) -> f64 {
    let n = golds.len() as f64;
    let mut total = 0.0;
    for c in [T, F, U] {
        let support = golds.iter().filter(|g| **g == c).count() as f64;
        if support == 0.0 {
            continue;
        }
        let tp = golds.iter().zip(preds).filter(|(g, p)| **g == c && **p == c).count() as f64;
        let predicted = preds.iter().filter(|p| **p == c).count() as f64;
        let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let recall = tp / support;
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        total += support / n * f1;
    }
    total
}

fn label_strategy() -> impl Strategy<Value = Label> {
    prop_oneof![Just(T), Just(F), Just(U)]
}

proptest! {
    #[test]
    fn weighted_f1_matches_reference(pairs in proptest::collection::vec((label_strategy(), label_strategy()), 1..60)) {
        let (golds, preds): (Vec<Label>, Vec<Label>) = pairs.into_iter().unzip();
        let got = weighted_f1(&golds, &preds).unwrap();
        prop_assert!((0.0..=1.0).contains(&got));
        prop_assert!((got - reference_weighted_f1(&golds, &preds)).abs() < 1e-12);
        prop_assert_eq!(got == 1.0, golds == preds);
        prop_assert_eq!(weighted_f1(&golds, &golds).unwrap(), 1.0);
    }
}

#[test]
fn fixed_fixtures() {
    assert!((weighted_f1(&[T, T, U, F], &[T, U, U, F]).unwrap() - 0.75).abs() < 1e-9);
    assert_eq!(weighted_f1(&[T, U, U], &[T, U, U]).unwrap(), 1.0);
    assert_eq!(weighted_f1(&[T, U], &[U, T]).unwrap(), 0.0);
}

fn eval_set() -> Vec<Instance> {
    let r = Renderer::default();
    let mut cfg = DatasetConfig::default();
    cfg.sampler.seed = 17;
    let mut all = build_eval_set(EvalKind::Ccs, 70, &cfg, &r, 0).unwrap().instances;
    all.extend(build_eval_set(EvalKind::Ces, 20, &cfg, &r, 0).unwrap().instances);
    all
}

fn predict(data: &[Instance], mut f: impl FnMut(&Instance) -> Label) -> Vec<Prediction> {
    data.iter().map(|i| Prediction { id: i.id.clone(), prediction: f(i) }).collect()
}

#[test]
fn perfect_and_constant_predictors() {
    let data = eval_set();
    let perfect = score(&data, &predict(&data, |i| i.label), ScoreConfig::default()).unwrap();
    assert!(perfect.subsets.iter().all(|s| s.family_weighted_f1 == 1.0 && s.pooled_weighted_f1 == 1.0));
    assert!(perfect.groups.iter().all(|g| g.accuracy == 1.0));

    let constant = score(&data, &predict(&data, |_| T), ScoreConfig::default()).unwrap();
    for s in &constant.subsets {
        let mut families: BTreeMap<&str, Vec<Label>> = BTreeMap::new();
        for i in data.iter().filter(|i| i.subset == s.subset) {
            families.entry(&i.family_id).or_default().push(i.label);
        }
        let expected = families
            .values()
            .map(|golds| reference_weighted_f1(golds, &vec![T; golds.len()]))
            .sum::<f64>()
            / families.len() as f64;
        assert!((s.family_weighted_f1 - expected).abs() < 1e-9);
    }
}

#[test]
fn family_average_differs_from_pooled() {
    let data = eval_set();
    // Wrong on the whole first family only.
    let first = data[0].family_id.clone();
    let preds = predict(&data, |i| if i.family_id == first { i.label.flip() } else { i.label });
    let rep = score(&data, &preds, ScoreConfig::default()).unwrap();
    let ccs = rep.subsets.iter().find(|s| s.subset.as_str() == "ccs").unwrap();
    let expected = (ccs.families - 1) as f64 / ccs.families as f64
        + reference_weighted_f1(
            &data.iter().filter(|i| i.family_id == first).map(|i| i.label).collect::<Vec<_>>(),
            &data.iter().filter(|i| i.family_id == first).map(|i| i.label.flip()).collect::<Vec<_>>(),
        ) / ccs.families as f64;
    assert!((ccs.family_weighted_f1 - expected).abs() < 1e-12);
    assert!((ccs.family_weighted_f1 - ccs.pooled_weighted_f1).abs() > 1e-6);
}

#[test]
fn order_invariance() {
    let data = eval_set();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let preds = predict(&data, |i| if i.id.ends_with('3') { U } else { i.label });
    let a = score(&data, &preds, ScoreConfig::default()).unwrap();
    let mut shuffled = data.clone();
    shuffled.shuffle(&mut rng);
    let mut preds2 = preds.clone();
    preds2.shuffle(&mut rng);
    let b = score(&shuffled, &preds2, ScoreConfig::default()).unwrap();
    assert_eq!(a.subsets.len(), b.subsets.len());
    for (x, y) in a.subsets.iter().zip(&b.subsets) {
        assert!((x.family_weighted_f1 - y.family_weighted_f1).abs() < 1e-12);
        assert!((x.pooled_weighted_f1 - y.pooled_weighted_f1).abs() < 1e-12);
    }
}

#[test]
fn coverage_and_unknown_ids() {
    let data = eval_set();
    let mut preds = predict(&data, |i| i.label);
    preds.truncate(data.len() - 1);
    let rep = score(&data, &preds, ScoreConfig { min_coverage: 0.5, ..Default::default() }).unwrap();
    assert_eq!(rep.coverage.missing, 1);
    // The abstention counts against the family.
    assert!(rep.subsets.iter().any(|s| s.family_weighted_f1 < 1.0));

    preds.truncate(data.len() / 2);
    assert!(matches!(score(&data, &preds, ScoreConfig::default()), Err(ScoreError::CoverageTooLow { .. })));

    let mut extra = predict(&data, |i| i.label);
    extra.push(Prediction { id: "nope".into(), prediction: T });
    assert!(matches!(score(&data, &extra, ScoreConfig::default()), Err(ScoreError::UnknownId(_))));
    let rep = score(&data, &extra, ScoreConfig { allow_extra: true, ..Default::default() }).unwrap();
    assert_eq!(rep.coverage.extra, 1);
}

#[test]
fn train_split_families_are_theories() {
    let r = Renderer::default();
    let d = build_dataset(&DatasetConfig::default(), Sizes { train: 0, dev: 0, test: 60 }, &r, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let preds = predict(&d.test, |_| [T, F, U][rng.gen_range(0..3)]);
    let rep = score(&d.test, &preds, ScoreConfig::default()).unwrap();
    assert_eq!(rep.subsets[0].families, 10);
}
