use std::collections::{BTreeMap, HashSet};

use logicprobe::nlg::Renderer;
use logicprobe::pipeline::dataset::Sizes;
use logicprobe::pipeline::export::pick_demos;
use logicprobe::pipeline::*;
use logicprobe::{Label, OperatorProfile};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(profile: OperatorProfile, seed: u64) -> DatasetConfig {
    let mut cfg = DatasetConfig::default();
    cfg.sampler.profile = profile;
    cfg.sampler.seed = seed;
    cfg
}

fn to_bytes(instances: &[Instance]) -> Vec<u8> {
    let mut buf = Vec::new();
    emit_jsonl(instances, &mut buf).unwrap();
    buf
}

#[test]
fn split_sizes_are_exact_and_theories_disjoint() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::All, 1), Sizes { train: 100, dev: 20, test: 20 }, &r, 2).unwrap();
    assert_eq!((d.train.len(), d.dev.len(), d.test.len()), (100, 20, 20));
    let theories = |v: &[Instance]| v.iter().map(|i| i.theory().to_string()).collect::<HashSet<_>>();
    let (a, b, c) = (theories(&d.train), theories(&d.dev), theories(&d.test));
    assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
    for inst in d.train.iter().chain(&d.dev).chain(&d.test) {
        inst.verify().unwrap();
    }
}

#[test]
fn generation_is_independent_of_worker_count() {
    let r = Renderer::default();
    let cfg = config(OperatorProfile::AndNot, 99);
    let sizes = Sizes { train: 90, dev: 12, test: 12 };
    let one = build_dataset(&cfg, sizes, &r, 1).unwrap();
    let many = build_dataset(&cfg, sizes, &r, 4).unwrap();
    assert_eq!(to_bytes(&one.train), to_bytes(&many.train));
    assert_eq!(to_bytes(&one.test), to_bytes(&many.test));
    assert_eq!(serde_json::to_string(&one.metadata).unwrap(), serde_json::to_string(&many.metadata).unwrap());
    let e1 = build_eval_set(EvalKind::Dcs, 70, &cfg, &r, 1).unwrap();
    let e4 = build_eval_set(EvalKind::Dcs, 70, &cfg, &r, 3).unwrap();
    assert_eq!(to_bytes(&e1.instances), to_bytes(&e4.instances));
}

#[test]
fn not_profile_emits_only_simple_rules() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::Not, 5), Sizes { train: 120, dev: 0, test: 0 }, &r, 0).unwrap();
    assert!(d.train.iter().all(|i| i.lf.rules.iter().all(|r| r.is_simple())));
}

#[test]
fn per_theory_true_false_parity() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::OrNot, 6), Sizes { train: 300, dev: 0, test: 0 }, &r, 0).unwrap();
    let mut per_family: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for i in &d.train {
        let slot = Label::ALL.iter().position(|l| *l == i.label).unwrap();
        per_family.entry(&i.family_id).or_default()[slot] += 1;
    }
    assert!(per_family.values().all(|c| c[0] == c[1]), "{per_family:?}");
}

#[test]
fn no_unknown_filter() {
    let r = Renderer::default();
    let mut cfg = config(OperatorProfile::All, 3);
    cfg.no_unknown = true;
    let d = build_dataset(&cfg, Sizes { train: 40, dev: 0, test: 0 }, &r, 0).unwrap();
    assert_eq!(d.train.len(), 40);
    assert!(d.train.iter().all(|i| i.label != Label::Unknown));
    let e = build_eval_set(EvalKind::Ccs, 30, &cfg, &r, 0).unwrap();
    assert!(e.instances.iter().all(|i| i.label != Label::Unknown));
}

#[test]
fn distractor_free_evaluation_sets() {
    let r = Renderer::default();
    let mut cfg = config(OperatorProfile::All, 12);
    cfg.no_distractors = true;
    let e = build_eval_set(EvalKind::Ncs, 40, &cfg, &r, 0).unwrap();
    let bases: Vec<&Instance> = e.instances.iter().filter(|i| i.group.as_str() == "base").collect();
    assert!(!bases.is_empty());
    for b in bases {
        assert!(!b.meta.has_distractors, "{}", b.id);
    }
    for i in &e.instances {
        i.verify().unwrap();
    }
}

#[test]
fn evaluation_family_shapes() {
    let r = Renderer::default();
    let cfg = config(OperatorProfile::All, 2);
    for (kind, size) in [
        (EvalKind::Ccs, 7),
        (EvalKind::Dcs, 7),
        (EvalKind::Ncs, 4),
        (EvalKind::Ces, 2),
        (EvalKind::D1es, 2),
        (EvalKind::D2es, 2),
    ] {
        let e = build_eval_set(kind, 50, &cfg, &r, 0).unwrap();
        let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
        for i in &e.instances {
            *sizes.entry(&i.family_id).or_default() += 1;
            i.verify().unwrap();
        }
        assert!(sizes.values().all(|n| *n == size), "{kind:?}");
        assert!(e.instances.len() >= 50 && e.instances.len() < 50 + size);
    }
}

#[test]
fn jsonl_round_trip_and_errors() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::All, 8), Sizes { train: 10_000, dev: 0, test: 0 }, &r, 0).unwrap();
    let bytes = to_bytes(&d.train);
    assert_eq!(parse_jsonl(&bytes[..]).unwrap(), d.train);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.jsonl");
    write_jsonl(&path, &d.train[..3]).unwrap();
    assert_eq!(read_jsonl(&path).unwrap(), d.train[..3]);

    write_jsonl(&path, &[]).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), b"");
    assert!(read_jsonl(&path).unwrap().is_empty());

    let mut lines: Vec<String> = String::from_utf8(to_bytes(&d.train[..3])).unwrap().lines().map(String::from).collect();
    let mut broken: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    broken.as_object_mut().unwrap().remove("label");
    lines[1] = broken.to_string();
    let text = lines.join("\n") + "\n";
    match parse_jsonl(text.as_bytes()) {
        Err(PipelineError::Schema { line: 2, message }) => assert!(message.contains("label"), "{message}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn record_key_order_is_fixed() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::All, 1), Sizes { train: 1, dev: 0, test: 0 }, &r, 0).unwrap();
    let line = String::from_utf8(to_bytes(&d.train)).unwrap();
    let keys = ["\"id\"", "\"family_id\"", "\"subset\"", "\"group\"", "\"context_nl\"", "\"statement_nl\"", "\"label\"", "\"lf\"", "\"proof\"", "\"meta\""];
    let positions: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn audit_is_order_invariant() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::All, 4), Sizes { train: 600, dev: 0, test: 0 }, &r, 0).unwrap();
    let a = audit(&d.train, AuditConfig::default()).unwrap();
    let mut shuffled = d.train.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(audit(&shuffled, AuditConfig::default()).unwrap(), a);
    for f in &a.features {
        for v in &f.values {
            assert!((v.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
    assert!(matches!(audit(&[], AuditConfig::default()), Err(PipelineError::EmptyAudit)));
}

#[test]
fn uniform_feature_values_have_zero_distance() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::All, 4), Sizes { train: 60, dev: 0, test: 0 }, &r, 0).unwrap();
    // Every theory contributes 2/2/2, so theory-level features carry no signal.
    let a = audit(&d.train, AuditConfig::default()).unwrap();
    for f in a.features.iter().filter(|f| f.feature != "statement_neg") {
        assert!(f.values.iter().all(|v| v.tv < 1e-12), "{}", f.feature);
    }
}

#[test]
fn export_formats() {
    let r = Renderer::default();
    let d = build_dataset(&config(OperatorProfile::All, 4), Sizes { train: 6, dev: 0, test: 0 }, &r, 0).unwrap();
    let inst = &d.train[0];
    let cls = export_model_input(inst, ExportFormat::ConcatCls, &[]);
    assert_eq!(cls.input, format!("{} [SEP] {}", inst.context_nl, inst.statement_nl));
    assert_eq!(cls.input.matches(" [SEP] ").count(), 1);

    let s2s = export_model_input(inst, ExportFormat::Seq2seqPrefix, &[]);
    assert_eq!(s2s.input, format!("$answer$ ; $question$ = {} ; $context$ = {}", inst.statement_nl, inst.context_nl));
    assert_eq!(s2s.target, format!("$answer$ = {}", inst.label));

    let demos = pick_demos(inst, &d.train, 3);
    assert_eq!(demos.len(), 3);
    assert!(demos.iter().all(|x| x.id != inst.id));
    let prompt = export_model_input(inst, ExportFormat::Prompt3shot, &demos);
    assert_eq!(prompt.input.matches("Based on the previous passage, is it true that").count(), 4);
    let blocks: Vec<&str> = prompt.input.split("\n\n").collect();
    assert_eq!(blocks.len(), 4);
    assert!(blocks[3].ends_with("? Yes or no?"));
    assert!(["Yes", "No", "Maybe"].iter().any(|w| blocks[0].ends_with(w)));

    assert!(matches!("bogus".parse::<ExportFormat>(), Err(PipelineError::UnknownFormat(_))));
}
